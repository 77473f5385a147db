"""Serialisation: density-matrix JSON, record CSV/JSON and run manifests."""
import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _backend
from .errors import InvalidInputError
from .measures import RECORD_COLUMNS
from .sampling import GENERATOR_ID
from .states import validate_density

TOOL_VERSION = "0.1.0"
FORMAT_VERSION = "1"


@dataclass
class RunManifest:
    """Everything needed to regenerate an output file.

    Wall time is kept out of :meth:`header` so that rerunning a command
    reproduces the data file byte for byte; it is reported on stderr.
    """

    command: str
    config: dict
    seed: dict = None
    seed_source: str = None
    generator: str = GENERATOR_ID
    tool_version: str = TOOL_VERSION
    format_version: str = FORMAT_VERSION
    backend: str = field(default_factory=lambda: _backend.NAME)
    wall_time_s: float = None

    def header(self):
        d = asdict(self)
        d.pop("wall_time_s")
        return jsonable(d)


def fmt_float(x):
    """17 significant digits; empty string for nan."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def jsonable(obj):
    """Convert numpy containers/scalars to JSON types; nan becomes null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(payload):
    return json.dumps(jsonable(payload), indent=1, sort_keys=False) + "\n"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt_float(v)


def columns_to_csv(columns, manifest=None, names=None):
    """CSV text with an optional ``# manifest:`` comment line on top."""
    names = list(names or columns.keys())
    buf = _io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest.header(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    n = len(columns[names[0]])
    for i in range(n):
        w.writerow([_cell(columns[c][i]) for c in names])
    return buf.getvalue()


def records_csv_rows(cols):
    """CSV body rows (no header) for a chunk of record columns."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(cols["C"])
    for i in range(n):
        w.writerow([_cell(cols[c][i]) for c in RECORD_COLUMNS])
    return buf.getvalue()


def records_to_dicts(cols):
    n = len(cols["C"])
    return [{c: jsonable(cols[c][i]) for c in RECORD_COLUMNS} for i in range(n)]


# -- density matrix files ----------------------------------------------------

def density_to_json(rho):
    rho = np.asarray(rho, dtype=np.complex128)
    return {"dim": int(rho.shape[0]),
            "entries": [[float(z.real), float(z.imag)] for z in rho.ravel()]}


def parse_density(obj):
    """Matrix from ``{"dim": 4, "entries": [[re, im], ...]}`` (row-major)."""
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise InvalidInputError('density file needs "dim" and "entries" keys')
    dim = obj["dim"]
    if dim != 4:
        raise InvalidInputError(f"only dim 4 is supported, got {dim!r}")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != dim * dim:
        raise InvalidInputError(f"expected {dim * dim} [re, im] pairs")
    try:
        vals = [complex(float(re), float(im)) for re, im in entries]
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed entry: {exc}") from None
    return np.array(vals, dtype=np.complex128).reshape(dim, dim)


def load_density(path, tol=1e-9):
    """Read and validate a density-matrix JSON file."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    return validate_density(parse_density(obj), tol)
