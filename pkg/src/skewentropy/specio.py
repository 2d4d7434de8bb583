"""Loading distribution specs from JSON files with CSV parameter matrices.

A spec file is a JSON object with a ``family`` key and the family's
parameters.  Scalars may be written inline; vectors and matrices may be
inline (nested lists) or the name of a CSV file (comma-separated, row-major,
no header) resolved relative to the JSON file:

    {"family": "sn", "mu": 0.0, "sigma": 1.0, "alpha": 1.0}
    {"family": "cfusn", "mu": "mu.csv", "sigma": "sigma.csv", "delta": "delta.csv"}

Families: normal, lognormal, sn, lsn (univariate; ``sigma`` is the standard
deviation), mvn, cfusn, lcfusn, and mvlsn (the multivariate log-skew-normal
with an ``alpha`` vector).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import distributions as ds
from .errors import SkewEntropyError, SpecFileError
from .information import LsnSpec

__all__ = ["load_spec", "load_matrix", "write_matrix"]

_FAMILIES = ("normal", "lognormal", "sn", "lsn", "mvn", "cfusn", "lcfusn", "mvlsn")


def load_matrix(path) -> np.ndarray:
    """Read a header-free, row-major CSV matrix (1-row/1-column files load
    as vectors)."""
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except (OSError, ValueError) as exc:
        raise SpecFileError(f"could not read CSV matrix {path}: {exc}") from exc
    return arr


def write_matrix(path, arr) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    lines = [",".join(format(v, ".17g") for v in row) for row in arr]
    Path(path).write_text("\n".join(lines) + "\n")


def _resolve(value, base: Path, name: str, want: str):
    """Coerce an inline number/list or a CSV file reference to an array."""
    if isinstance(value, str):
        value = load_matrix(base / value)
    arr = np.asarray(value, dtype=float)
    if want == "scalar":
        if arr.size != 1:
            raise SpecFileError(f"parameter {name!r} must be a scalar")
        return float(arr.reshape(-1)[0])
    if want == "vector":
        return arr.reshape(-1)
    if arr.ndim == 1:  # a single CSV row parses as shape (1, k)
        arr = np.atleast_2d(arr)
    return arr


def _require(obj: dict, keys: set[str], family: str):
    missing = keys - set(obj)
    if missing:
        raise SpecFileError(f"family {family!r} needs parameters {sorted(missing)}")
    extra = set(obj) - keys - {"family"}
    if extra:
        raise SpecFileError(f"unknown parameters {sorted(extra)} for family {family!r}")


def load_spec(path):
    """Parse and validate a spec file; raises SpecFileError (with a line
    number for JSON syntax errors) or a validation error from the family
    constructors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read spec file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(
            f"{path}:{exc.lineno}: invalid JSON: {exc.msg}", line=exc.lineno
        ) from exc
    if not isinstance(obj, dict) or "family" not in obj:
        raise SpecFileError(f"{path}: spec must be a JSON object with a 'family' key")
    family = obj["family"]
    if family not in _FAMILIES:
        raise SpecFileError(
            f"{path}: unknown family {family!r}; expected one of {_FAMILIES}"
        )
    base = path.parent
    try:
        if family in ("normal", "lognormal"):
            _require(obj, {"mu", "sigma"}, family)
            cls = ds.Normal if family == "normal" else ds.LogNormal
            return cls(
                _resolve(obj["mu"], base, "mu", "scalar"),
                _resolve(obj["sigma"], base, "sigma", "scalar"),
            )
        if family in ("sn", "lsn"):
            _require(obj, {"mu", "sigma", "alpha"}, family)
            cls = ds.SkewNormal if family == "sn" else ds.LogSkewNormal
            return cls(
                _resolve(obj["mu"], base, "mu", "scalar"),
                _resolve(obj["sigma"], base, "sigma", "scalar"),
                _resolve(obj["alpha"], base, "alpha", "scalar"),
            )
        if family == "mvn":
            _require(obj, {"mu", "sigma"}, family)
            loc = ds.LocationScale.from_values(
                _resolve(obj["mu"], base, "mu", "vector"),
                _resolve(obj["sigma"], base, "sigma", "matrix"),
            )
            return ds.MultivariateNormal(loc)
        if family == "mvlsn":
            _require(obj, {"mu", "sigma", "alpha"}, family)
            return LsnSpec.from_values(
                _resolve(obj["mu"], base, "mu", "vector"),
                _resolve(obj["sigma"], base, "sigma", "matrix"),
                _resolve(obj["alpha"], base, "alpha", "vector"),
            )
        _require(obj, {"mu", "sigma", "delta"}, family)
        loc = ds.LocationScale.from_values(
            _resolve(obj["mu"], base, "mu", "vector"),
            _resolve(obj["sigma"], base, "sigma", "matrix"),
        )
        skew = ds.SkewnessMatrix.from_matrix(
            _resolve(obj["delta"], base, "delta", "matrix")
        )
        cls = ds.Cfusn if family == "cfusn" else ds.Lcfusn
        return cls(loc, skew)
    except SkewEntropyError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecFileError(f"{path}: invalid parameter value: {exc}") from exc
