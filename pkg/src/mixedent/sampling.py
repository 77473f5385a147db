"""Random two-qubit states under the ZHSL product measure.

A ZHSL state is ``U diag(p) U^H`` with ``U`` Haar-distributed on U(N) and
``p`` uniform (Lebesgue) on the probability simplex.

Streams are numpy ``Generator`` objects on the counter-based Philox bit
generator. ``split_stream(seed, chunk)`` derives an independent stream per
work chunk from ``SeedSequence(master_seed, spawn_key=(stream_index, chunk))``,
so a sweep's result depends only on the seed and the chunking, never on the
number of workers.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .states import ih_states

GENERATOR_ID = f"numpy-{np.__version__}:Philox4x64-10:SeedSequence(master,(stream,chunk))"


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise InvalidInputError("stream_index must be nonnegative")


def split_stream(seed, chunk=0):
    """Independent, reproducible random stream for work chunk ``chunk``."""
    if isinstance(seed, int):
        seed = SeedSpec(seed)
    ss = np.random.SeedSequence(seed.master_seed, spawn_key=(seed.stream_index, int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


def haar_unitaries(n, dim, rng):
    """``n`` Haar-random ``dim x dim`` unitaries (QR of a complex Ginibre matrix)."""
    z = rng.standard_normal((n, dim, dim, 2))
    z = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    # fix the column phases so R has a positive diagonal; plain QR is not Haar
    return q * (d / np.abs(d))[:, None, :]


def haar_unitary(dim, rng):
    if dim not in (2, 4):
        raise InvalidInputError(f"dim must be 2 or 4, got {dim}")
    return haar_unitaries(1, dim, rng)[0]


def simplex_points(n, dim, rng):
    """``n`` points uniform on the (dim-1)-simplex: normalised exponentials."""
    if dim < 2:
        raise InvalidInputError(f"dim must be at least 2, got {dim}")
    e = rng.standard_exponential((n, dim))
    return e / e.sum(axis=1, keepdims=True)


def simplex_point(dim, rng):
    return simplex_points(1, dim, rng)[0]


def zhsl_states(n, rng, return_spectra=False):
    """``n`` ZHSL-distributed two-qubit states.

    Unitaries and eigenvalues come from two child streams of ``rng``, so the
    first ``k`` states of a batch do not depend on the batch size.
    """
    u_rng, p_rng = rng.spawn(2)
    u = haar_unitaries(n, 4, u_rng)
    p = simplex_points(n, 4, p_rng)
    rho = (u * p[:, None, :]) @ np.conj(np.swapaxes(u, 1, 2))
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
    if return_spectra:
        return rho, p
    return rho


def zhsl_state(rng):
    return zhsl_states(1, rng)[0]


def ih_random_batch(n, rng):
    """``n`` random IH states: sorted simplex spectra and their matrices."""
    p = -np.sort(-simplex_points(n, 4, rng), axis=1)
    return p, ih_states(p)


def ih_random(rng):
    p, rho = ih_random_batch(1, rng)
    return p[0], rho[0]
