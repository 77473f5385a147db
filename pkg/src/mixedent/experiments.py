"""Deterministic Monte Carlo sweeps over two-qubit state space.

Samples are processed in fixed-size chunks, each drawn from its own stream
(``split_stream(seed, chunk_index)``). Per-chunk results are merged with
sums, maxima and minima only, so the outcome is independent of how many
worker processes evaluate the chunks.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericError
from .measures import (
    QINF,
    batch_measures,
    batch_ppt_min_eigenvalue,
    concurrence,
    concurrence_ih_batch,
    conditional_renyi,
    ih_concurrence_floor,
    participation_ratio,
)
from .sampling import SeedSpec, ih_random_batch, split_stream, zhsl_states
from .states import REGIME_R, mems, mems_x_from_R

DEFAULT_SEED = 20040115
CHUNK_SIZE = 8192
ENSEMBLES = ("zhsl", "ih", "mems")
CONTOUR_TOL = 1e-9


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a binned Monte Carlo sweep.

    ``interval`` is the closed range of the binning variable (R, or
    lambda_max for :func:`band_scan_lambda`). ``min_count`` flags bins whose
    qualifying-state count falls below it.
    """

    samples: int = 10**6
    bins: int = 40
    interval: tuple = (1.0, 3.0)
    qset: tuple = (QINF,)
    seed: SeedSpec = SeedSpec(DEFAULT_SEED)
    ensemble: str = "zhsl"
    chunk_size: int = CHUNK_SIZE
    workers: int = 1
    min_count: int = 10

    def __post_init__(self):
        if self.samples < 1:
            raise InvalidInputError("samples must be >= 1")
        if self.bins < 2:
            raise InvalidInputError("bins must be >= 2")
        lo, hi = self.interval
        if not hi > lo:
            raise InvalidInputError(f"empty interval {self.interval}")
        if self.ensemble not in ENSEMBLES:
            raise InvalidInputError(f"ensemble must be one of {ENSEMBLES}")
        if self.chunk_size < 1 or self.workers < 1:
            raise InvalidInputError("chunk_size and workers must be >= 1")

    @property
    def edges(self):
        return np.linspace(self.interval[0], self.interval[1], self.bins + 1)

    def as_dict(self):
        d = asdict(self)
        d["interval"] = list(self.interval)
        d["qset"] = ["inf" if q == QINF else q for q in self.qset]
        return d


@dataclass
class BinSeries:
    """Binned sweep output.

    ``counts`` are qualifying states per bin, ``totals`` all sampled states
    per bin. Empty bins carry ``nan`` in ``max_C``/``min_C``.
    """

    edges: np.ndarray
    counts: np.ndarray
    max_C: np.ndarray
    totals: np.ndarray
    min_C: np.ndarray = None
    min_count: int = 0
    aux: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def undersampled(self):
        return self.counts < self.min_count

    def argmax_center(self):
        if np.all(np.isnan(self.max_C)):
            return math.nan
        return float(self.centers[np.nanargmax(self.max_C)])

    def columns(self):
        cols = {
            "bin_center": self.centers,
            "bin_lo": self.edges[:-1],
            "bin_hi": self.edges[1:],
            "count": self.counts,
            "total": self.totals,
            "max_C": self.max_C,
        }
        if self.min_C is not None:
            cols["min_C"] = self.min_C
        cols["undersampled"] = self.undersampled
        cols.update(self.aux)
        return cols


# -- chunk plumbing -----------------------------------------------------------

def chunk_plan(samples, chunk_size=CHUNK_SIZE):
    """``(chunk_index, size)`` pairs covering ``samples`` draws."""
    return [(k, min(chunk_size, samples - k * chunk_size))
            for k in range(math.ceil(samples / chunk_size))]


def draw_chunk(config, k, n):
    """States of chunk ``k``; also returns the IH spectra for ``ensemble='ih'``."""
    rng = split_stream(config.seed, k)
    if config.ensemble == "zhsl":
        return zhsl_states(n, rng), None
    if config.ensemble == "ih":
        p, rho = ih_random_batch(n, rng)
        return rho, p
    raise InvalidInputError("MEMS grids are deterministic; use mems_conditional_profile")


def _map_chunks(fn, config):
    jobs = [(config, k, n) for k, n in chunk_plan(config.samples, config.chunk_size)]
    if config.workers == 1 or len(jobs) == 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, jobs))


def check_record_invariants(cols, tol=1e-9):
    """Abort on records outside the physical ranges of the measures."""
    checks = {
        "C": (0.0, 1.0),
        "E": (0.0, 1.0),
        "R": (1.0, 4.0),
        "lambda_max": (0.25, 1.0),
    }
    for name, (lo, hi) in checks.items():
        v = cols[name]
        bad = ~((v >= lo - tol) & (v <= hi + tol))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise NumericError(f"record {i}: {name} = {v[i]!r} outside [{lo}, {hi}]")


def iter_records(config, fef=True):
    """Yield the measure columns of each chunk in order (single process)."""
    for k, n in chunk_plan(config.samples, config.chunk_size):
        rho, _ = draw_chunk(config, k, n)
        cols = batch_measures(rho, config.qset, fef=fef)
        check_record_invariants(cols)
        yield cols


def _bin_index(values, edges):
    idx = np.searchsorted(edges, values, side="right") - 1
    # the top edge belongs to the last bin
    idx[values == edges[-1]] = len(edges) - 2
    inside = (values >= edges[0]) & (values <= edges[-1])
    return idx, inside


def _bin_reduce(values, key, qualify, edges):
    nb = len(edges) - 1
    idx, inside = _bin_index(key, edges)
    totals = np.bincount(idx[inside], minlength=nb)
    sel = inside & qualify
    counts = np.bincount(idx[sel], minlength=nb)
    mx = np.full(nb, -np.inf)
    mn = np.full(nb, np.inf)
    np.maximum.at(mx, idx[sel], values[sel])
    np.minimum.at(mn, idx[sel], values[sel])
    return counts, totals, mx, mn


def _merge(parts, edges, min_count):
    counts = sum(p[0] for p in parts)
    totals = sum(p[1] for p in parts)
    mx = np.max([p[2] for p in parts], axis=0)
    mn = np.min([p[3] for p in parts], axis=0)
    mx[counts == 0] = np.nan
    mn[counts == 0] = np.nan
    return BinSeries(edges, counts, mx, totals, min_C=mn, min_count=min_count)


# -- ESCRE sweep -------------------------------------------------------------

def _escre_chunk(job):
    config, k, n = job
    rho, _ = draw_chunk(config, k, n)
    cols = batch_measures(rho, config.qset, fef=False)
    check_record_invariants(cols)
    qualify = cols["entangled"] & cols["classical_ineq"]
    return _bin_reduce(cols["C"], cols["R"], qualify, config.edges)


def escre_max_sweep(config):
    """Per-R-bin maximum concurrence of entangled states obeying the
    classical conditional-entropy inequalities for every q in ``config.qset``.
    """
    if QINF not in config.qset:
        raise InvalidInputError("the ESCRE classifier needs q = inf in qset")
    parts = _map_chunks(_escre_chunk, config)
    series = _merge(parts, config.edges, config.min_count)
    series.aux["mems_C"] = mems_curve(series.centers)
    return series


def mems_curve(R):
    """Concurrence of the MEMS family as a function of participation ratio."""
    R = np.atleast_1d(np.asarray(R, dtype=float))
    out = np.full(R.shape, np.nan)
    ok = (R >= 1.0) & (R <= 3.0)
    out[ok] = [mems_x_from_R(r) for r in R[ok]]
    return out


def floor_curve(R):
    R = np.atleast_1d(np.asarray(R, dtype=float))
    out = np.full(R.shape, np.nan)
    ok = (R >= 1.0) & (R <= 3.0)
    out[ok] = ih_concurrence_floor(R[ok])
    return out


# -- band scans --------------------------------------------------------------

def _band_r_chunk(job):
    config, k, n = job
    rho, _ = draw_chunk(config, k, n)
    cols = batch_measures(rho, (QINF,), fef=False)
    check_record_invariants(cols)
    edges = config.edges
    counts, totals, mx, _ = _bin_reduce(cols["C"], cols["R"], np.ones(n, dtype=bool), edges)
    # lower envelope only over entangled states
    _, _, _, mn = _bin_reduce(cols["C"], cols["R"], cols["entangled"], edges)
    s = cols["Sinf_AB"]
    below = cols["R"] < REGIME_R
    signs = (int(np.sum(below & (s < -1e-12))), int(np.sum(below & (np.abs(s) <= 1e-12))),
             int(np.sum(below & (s > 1e-12))))
    return counts, totals, mx, mn, signs


def band_scan_R(config):
    """Concurrence band versus participation ratio with analytic overlays.

    ``aux`` carries the MEMS curve and the IH concurrence floor at the bin
    centres and at the bin edges that bound them, plus the sign counts of
    S_inf(A|B) for states with R < 1.8 (``sinf_sign_counts``: negative,
    zero, positive).
    """
    if config.ensemble not in ("ih", "zhsl"):
        raise InvalidInputError("band_scan_R needs ensemble 'ih' or 'zhsl'")
    parts = _map_chunks(_band_r_chunk, config)
    series = _merge([p[:4] for p in parts], config.edges, config.min_count)
    series.min_C[np.isinf(series.min_C)] = np.nan
    e = config.edges
    series.aux.update(
        mems_C=mems_curve(series.centers),
        mems_C_at_lo=mems_curve(e[:-1]),
        floor_C=floor_curve(series.centers),
        floor_C_at_hi=floor_curve(e[1:]),
    )
    series.meta["sinf_sign_counts_below_regime"] = dict(
        zip(("negative", "zero", "positive"), (sum(p[4][i] for p in parts) for i in range(3))))
    return series


def contour_violations(lam, C, tol=CONTOUR_TOL):
    """Boolean mask of (lambda_max, C) pairs outside the analytic zones.

    Zone I (lambda >= 1/2): 2 lambda - 1 <= C <= lambda; zone II
    (1/3 <= lambda < 1/2): 0 <= C <= 3 lambda - 1; zone III: C = 0.
    """
    lam = np.asarray(lam)
    C = np.asarray(C)
    z1 = lam >= 0.5
    z2 = (lam >= 1.0 / 3.0) & ~z1
    z3 = ~(z1 | z2)
    bad = np.zeros(lam.shape, dtype=bool)
    bad |= z1 & ((C > lam + tol) | (C < 2 * lam - 1 - tol))
    bad |= z2 & ((C > 3 * lam - 1 + tol) | (C < -tol))
    bad |= z3 & (C > tol)
    return bad, (z1, z2, z3)


def _band_lambda_chunk(job):
    config, k, n = job
    rho, _ = draw_chunk(config, k, n)
    cols = batch_measures(rho, (QINF,), fef=False)
    check_record_invariants(cols)
    lam, C = cols["lambda_max"], cols["C"]
    bad, zones = contour_violations(lam, C)
    counts, totals, mx, mn = _bin_reduce(C, lam, np.ones(n, dtype=bool), config.edges)
    return (counts, totals, mx, mn,
            [int(np.sum(bad & z)) for z in zones], [int(np.sum(z)) for z in zones])


def band_scan_lambda(config):
    """Concurrence versus largest eigenvalue, checked against the zone contours.

    Returns ``(series, report)``; ``series.aux`` holds the analytic upper and
    lower contours at bin centres and the MEMS overlay, ``report`` the
    violation counts per zone.
    """
    if config.ensemble not in ("ih", "zhsl"):
        raise InvalidInputError("band_scan_lambda needs ensemble 'ih' or 'zhsl'")
    parts = _map_chunks(_band_lambda_chunk, config)
    series = _merge([p[:4] for p in parts], config.edges, config.min_count)
    c = series.centers
    series.aux.update(
        upper_contour=upper_contour(c),
        lower_contour=lower_contour(c),
    )
    viol = [sum(p[4][i] for p in parts) for i in range(3)]
    sizes = [sum(p[5][i] for p in parts) for i in range(3)]
    witnesses = contour_witnesses()
    report = {
        "samples": config.samples,
        "zone_sizes": dict(zip(("I", "II", "III"), sizes)),
        "violations": dict(zip(("I", "II", "III"), viol)),
        "witnesses": witnesses,
        "mems_overlay": mems_lambda_overlay(),
        "passed": sum(viol) == 0 and all(w["error"] <= 1e-12 for w in witnesses),
    }
    return series, report


def upper_contour(lam):
    lam = np.asarray(lam, dtype=float)
    return np.where(lam >= 0.5, lam, np.maximum(3 * lam - 1, 0.0))


def lower_contour(lam):
    lam = np.asarray(lam, dtype=float)
    return np.where(lam >= 0.5, 2 * lam - 1, 0.0)


def contour_witnesses(lams_upper=(0.55, 0.7, 0.85, 1.0), lams_mid=(1 / 3, 0.4, 0.45, 0.5)):
    """Spectra that attain the upper contours, with their concurrence error."""
    from .states import ih_state

    out = []
    for lam in lams_upper:
        p = (lam, 1 - lam, 0.0, 0.0)
        c = concurrence(ih_state(p)).C
        out.append({"p": list(p), "C": c, "contour": lam, "error": abs(c - lam)})
    for lam in lams_mid:
        p = (lam, lam, 1 - 2 * lam, 0.0)
        c = concurrence(ih_state(p)).C
        out.append({"p": list(p), "C": c, "contour": 3 * lam - 1, "error": abs(c - (3 * lam - 1))})
    return out


def mems_lambda_overlay(xs=np.linspace(0.0, 1.0, 21)):
    from .measures import lambda_max

    return [{"x": float(x), "lambda_max": lambda_max(mems(x)), "C": float(x)} for x in xs]


# -- analytic checks ---------------------------------------------------------

def floor_family(a):
    """Spectrum (a, (1-a)/3, (1-a)/3, (1-a)/3), which attains the IH floor."""
    b = (1.0 - a) / 3.0
    return np.array([a, b, b, b])


def floor_family_a(R):
    """Invert R(a) = 1 / (a^2 + (1 - a)^2 / 3) on the branch a >= 1/2."""
    return 0.25 * (1.0 + math.sqrt(max(12.0 / R - 3.0, 0.0)))


def ih_bound_check(r_grid, trials, seed=SeedSpec(DEFAULT_SEED), assert_max=REGIME_R,
                   chunk_size=1 << 16):
    """Check the IH concurrence floor analytically and by sampling.

    Parameters
    ----------
    r_grid : sequence of float
        Participation ratios in [1, 3); also the bin edges for the sampled
        gaps.
    trials : int
        Number of random IH spectra with R <= ``assert_max`` to collect.
    """
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    if r_grid[0] < 1.0 or r_grid[-1] >= 3.0:
        raise InvalidInputError("R grid must lie in [1, 3)")
    family = []
    for R in r_grid:
        p = floor_family(floor_family_a(R))
        c = float(concurrence_ih_batch(p[None])[0])
        r_p = 1.0 / float(np.sum(p * p))
        family.append({"R": float(R), "a": float(p[0]), "C": c,
                       "floor": float(ih_concurrence_floor(r_p)),
                       "error": abs(c - float(ih_concurrence_floor(r_p)))})

    kept = drawn = k = 0
    min_gap = math.inf
    edges = r_grid
    nb = len(edges) - 1
    bin_gap = np.full(nb, np.inf)
    bin_n = np.zeros(nb, dtype=int)
    outside_n = outside_viol = 0
    while kept < trials:
        p, _ = ih_random_batch(chunk_size, split_stream(seed, k))
        k += 1
        R = 1.0 / np.sum(p * p, axis=1)
        gap = concurrence_ih_batch(p) - floor_curve(np.minimum(R, 3.0))
        asserted = R <= assert_max
        cum = np.cumsum(asserted)
        last = chunk_size
        if cum[-1] > trials - kept:
            last = int(np.searchsorted(cum, trials - kept)) + 1
        R, gap, asserted = R[:last], gap[:last], asserted[:last]
        drawn += last
        kept += int(asserted.sum())
        if asserted.any():
            min_gap = min(min_gap, float(gap[asserted].min()))
        idx, inside = _bin_index(R, edges)
        np.minimum.at(bin_gap, idx[inside], gap[inside])
        bin_n += np.bincount(idx[inside], minlength=nb)
        out = ~asserted
        outside_n += int(out.sum())
        outside_viol += int(np.sum(out & (gap < -1e-9)))
    bin_gap[np.isinf(bin_gap)] = np.nan
    return {
        "family": family,
        "family_max_error": max(f["error"] for f in family),
        "asserted_range": [1.0, assert_max],
        "trials": kept,
        "drawn": drawn,
        "min_gap": min_gap,
        "bins": [{"lo": float(edges[i]), "hi": float(edges[i + 1]), "n": int(bin_n[i]),
                  "min_gap": float(bin_gap[i])} for i in range(nb)],
        "outside_samples": outside_n,
        "outside_violation_rate": outside_viol / outside_n if outside_n else 0.0,
        "passed": max(f["error"] for f in family) <= 1e-12 and min_gap >= -1e-9,
    }


def richardson(values, steps):
    """Extrapolate finite-difference estimates to zero step size.

    ``values[i]`` is the estimate at step ``steps[i]``. Each tableau level
    removes the next power of the step (Neville form, any step ratios).
    Returns the tableau rows; ``rows[-1][0]`` is the extrapolated value.
    """
    rows = [[float(v) for v in values]]
    for k in range(1, len(values)):
        prev = rows[-1]
        rows.append([
            (steps[i] * prev[i + 1] - steps[i + k] * prev[i]) / (steps[i] - steps[i + k])
            for i in range(len(prev) - 1)
        ])
    return rows


def mems_slope_check(q, epsilons=(1e-2, 1e-3, 1e-4), base=2, rel_tol=0.02):
    """Finite-difference slope dS_q(A|B)/dC of the MEMS family at C = 1.

    The measured slope (in ``base`` units per unit concurrence) is compared
    with ``-q / ((q - 1) ln 2)`` and with twice that value.
    """
    if not q > 1:
        raise InvalidInputError(f"slope check needs q > 1, got {q}")
    eps = sorted(map(float, epsilons), reverse=True)
    s1 = conditional_renyi(mems(1.0), q, "B", base)
    c1 = concurrence(mems(1.0)).C
    raw = []
    for e in eps:
        rho = mems(1.0 - e)
        raw.append((conditional_renyi(rho, q, "B", base) - s1) / (concurrence(rho).C - c1))
    tableau = richardson(raw, eps)
    slope = tableau[-1][0]
    direct = -q / ((q - 1.0) * math.log(base))
    doubled = 2.0 * direct
    err_direct = abs(slope - direct) / abs(direct)
    err_doubled = abs(slope - doubled) / abs(doubled)
    matched = None
    if min(err_direct, err_doubled) <= rel_tol:
        matched = "direct" if err_direct <= err_doubled else "doubled"
    return {
        "q": q,
        "epsilons": eps,
        "raw_slopes": raw,
        "extrapolated": slope,
        "candidate_direct": direct,
        "candidate_doubled": doubled,
        "rel_error_direct": err_direct,
        "rel_error_doubled": err_doubled,
        "matched": matched,
        "passed": matched is not None and slope < 0,
    }


def mems_conditional_profile(xs, base=2):
    """(x, R, C, S_inf(A|B), S_inf(B|A)) along the MEMS family."""
    out = []
    for x in xs:
        rho = mems(x)
        out.append({
            "x": float(x),
            "R": participation_ratio(rho),
            "C": concurrence(rho).C,
            "Sinf_AB": conditional_renyi(rho, QINF, "B", base),
            "Sinf_BA": conditional_renyi(rho, QINF, "A", base),
        })
    return out


def _ppt_chunk(job):
    config, k, n = job
    rho, _ = draw_chunk(config, k, n)
    cols = batch_measures(rho, (QINF,), fef=False)
    pt_min = batch_ppt_min_eigenvalue(rho)
    ent_c = cols["C"] > 1e-10
    ent_pt = pt_min < -1e-10
    high_r = cols["R"] >= 3.0
    return (int(np.sum(ent_c != ent_pt)), int(np.sum(ent_c)),
            int(np.sum(high_r)), int(np.sum(high_r & ent_pt)))


def ppt_concurrence_check(config):
    """Compare ``C > 1e-10`` with a negative partial-transpose eigenvalue."""
    parts = _map_chunks(_ppt_chunk, config)
    mism, ent, high, high_npt = (sum(p[i] for p in parts) for i in range(4))
    return {
        "samples": config.samples,
        "entangled": ent,
        "mismatches": mism,
        "high_R_states": high,
        "high_R_not_ppt": high_npt,
        "passed": mism == 0 and high_npt == 0,
    }


def _fef_chunk(job):
    config, k, n = job
    rho, _ = draw_chunk(config, k, n)
    cols = batch_measures(rho, (QINF,), fef=True)
    f, C = cols["F_EF"], cols["C"]
    sel = cols["entangled"] & (f >= 0.5)
    inside = sel & (C >= f - 1e-12) & (C <= 0.5 * (f + 1.0) + 1e-12)
    # the standard two-qubit relation, for comparison
    lower = sel & (C >= 2.0 * f - 1.0 - 1e-12)
    return int(sel.sum()), int(inside.sum()), int(lower.sum())


def fef_range_diagnostic(config):
    """How often ``F_EF <= C <= (F_EF + 1)/2`` holds for entangled states
    with ``F_EF >= 1/2``. Reported, never asserted.
    """
    parts = _map_chunks(_fef_chunk, config)
    n_sel = sum(p[0] for p in parts)
    n_in = sum(p[1] for p in parts)
    n_low = sum(p[2] for p in parts)
    return {"samples": config.samples, "eligible": n_sel, "inside": n_in,
            "rate": n_in / n_sel if n_sel else math.nan,
            "rate_C_ge_2F_minus_1": n_low / n_sel if n_sel else math.nan}
