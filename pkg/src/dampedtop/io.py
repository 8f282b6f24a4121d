"""Configuration parsing, CSV/JSON output and run manifests."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


_UMASK = os.umask(0)
os.umask(_UMASK)


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> list[float]:
    items = [s for s in text.replace(",", " ").split() if s]
    if not items:
        raise ConfigError("empty list")
    return [float(s) for s in items]


def _parse_int_list(text: str) -> list[int]:
    items = [s for s in text.replace(",", " ").split() if s]
    if not items:
        raise ConfigError("empty list")
    return [int(float(s)) if float(s).is_integer() else int(s) for s in items]


def _parse_brackets(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.replace(",", " ").split():
        lo, sep, hi = item.partition(":")
        if not sep:
            raise ConfigError(f"bracket must be lo:hi, got {item!r}")
        out.append((float(lo), float(hi)))
    if not out:
        raise ConfigError("empty bracket list")
    return out


PARSERS = {
    "float": float,
    "int": lambda s: int(float(s)) if float(s).is_integer() else int(s),
    "bool": _parse_bool,
    "str": str,
    "floats": _parse_float_list,
    "ints": _parse_int_list,
    "brackets": _parse_brackets,
}


def parse_value(kind: str, text):
    if not isinstance(text, str):
        return text
    try:
        return PARSERS[kind](text)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse {text!r} as {kind}: {exc}") from None


def read_config(path, schema: dict[str, dict[str, str]]) -> dict[str, dict]:
    """Read a sectioned ``key = value`` file, rejecting unknown sections and keys.

    ``schema`` maps section name to ``{key: kind}``; values come back parsed.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out: dict[str, dict] = {}
    for section in cp.sections():
        if section not in schema:
            raise ConfigError(f"unknown config section [{section}]")
        keys = schema[section]
        vals = {}
        for key, raw in cp.items(section):
            norm = key.replace("-", "_")
            if norm not in keys:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            vals[norm] = parse_value(keys[norm], raw)
        out[section] = vals
    return out


def fmt(x) -> str:
    """17 significant digits, round-trip exact for float64."""
    if isinstance(x, (bool,)):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rdr = csv.reader(fh)
        header = next(rdr)
        rows = [[float(v) if v != "" else math.nan for v in row] for row in rdr]
    return header, rows


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_bytes(path, dumps(obj).encode("utf-8"))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(path, command: str, config: dict, outputs, seed: int) -> Path:
    path = Path(path)
    digests = {Path(p).name: sha256_file(p) for p in outputs}
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": digests,
    }
    return write_json(path, manifest)


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    for key in ("command", "config", "outputs"):
        if key not in data:
            raise ConfigError(f"manifest {path} lacks {key!r}")
    return data
