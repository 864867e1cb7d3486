"""JSON reports and CSV profiles."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys

import numpy as np

REPORT_VERSION = 1
TIMING_KEY = "wall_clock"


def to_jsonable(obj):
    """Plain JSON types; infinities and NaN become the strings "inf", "-inf", "nan"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


_SPECIAL = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def from_jsonable(obj):
    """Inverse of the float encoding of ``to_jsonable``."""
    if isinstance(obj, dict):
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    if isinstance(obj, str) and obj in _SPECIAL:
        return _SPECIAL[obj]
    return obj


def environment():
    import scipy

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": sys.platform,
    }


def build_report(command, config, result, wall_clock=None):
    rep = {
        "version": REPORT_VERSION,
        "command": command,
        "config": config,
        "result": result,
        "environment": environment(),
    }
    if wall_clock is not None:
        rep[TIMING_KEY] = wall_clock
    return to_jsonable(rep)


def dumps(report):
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def loads(text):
    return from_jsonable(json.loads(text))


def write_report(report, path=None):
    text = dumps(report)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def profile_csv(profile):
    """``radius,angle,value`` rows with 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["radius", "angle", "value"])
    for r, a, v in np.asarray(profile, dtype=float):
        w.writerow(["%.17g" % r, "%.17g" % a, "%.17g" % v])
    return buf.getvalue()


def write_profile(path, profile):
    text = profile_csv(profile)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def read_profile(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
