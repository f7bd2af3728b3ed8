"""
JSON encoding of TorusMap tables.

Floats are written as hexadecimal strings (float.hex) so that the round
trip is bit-exact in binary64.
"""
import json
from pathlib import Path
from typing import Any, Dict

import numpy as np

from fourier.torus_map import Parity, TorusMap


def torus_to_dict(tm: TorusMap) -> Dict[str, Any]:
    entries = [
        {
            "k": list(k),
            "j": j,
            "re": [float(v).hex() for v in vec.real],
            "im": [float(v).hex() for v in vec.imag],
        }
        for k, j, vec in tm.entries()
    ]
    return {
        "l": tm.ell,
        "d": tm.d,
        "k_theta_max": tm.k_theta_max,
        "k_x_max": tm.k_x_max,
        "parity": [[pt.value, px.value] for pt, px in tm.parity],
        "zero_mean": tm.zero_mean,
        "entries": entries,
    }


def torus_from_dict(data: Dict[str, Any]) -> TorusMap:
    ell, d = int(data["l"]), int(data["d"])
    kt, kx = int(data["k_theta_max"]), int(data["k_x_max"])
    shape = (d,) + (2 * kt + 1,) * ell + (2 * kx + 1,)
    coeffs = np.zeros(shape, dtype=np.complex128)
    for entry in data["entries"]:
        idx = tuple(int(k) + kt for k in entry["k"]) + (int(entry["j"]) + kx,)
        re = np.array([float.fromhex(v) for v in entry["re"]])
        im = np.array([float.fromhex(v) for v in entry["im"]])
        coeffs[(slice(None),) + idx] = re + 1j * im
    parity = tuple((Parity(p[0]), Parity(p[1])) for p in data.get("parity", [["none", "none"]] * d))
    return TorusMap(coeffs, ell, kt, kx, parity, bool(data.get("zero_mean", False)))


def dumps(tm: TorusMap) -> str:
    return json.dumps(torus_to_dict(tm), indent=1)


def loads(text: str) -> TorusMap:
    return torus_from_dict(json.loads(text))


def save_torus(tm: TorusMap, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps(tm), encoding="utf-8")


def load_torus(path: str) -> TorusMap:
    return loads(Path(path).read_text(encoding="utf-8"))


def array_to_dict(arr: np.ndarray) -> Dict[str, Any]:
    """Bit-exact encoding of a real or complex array."""
    arr = np.asarray(arr)
    flat = arr.astype(np.complex128).ravel()
    return {
        "shape": list(arr.shape),
        "complex": bool(np.iscomplexobj(arr)),
        "re": [float(v).hex() for v in flat.real],
        "im": [float(v).hex() for v in flat.imag] if np.iscomplexobj(arr) else [],
    }


def array_from_dict(data: Dict[str, Any]) -> np.ndarray:
    re = np.array([float.fromhex(v) for v in data["re"]], dtype=float)
    if not data.get("complex", False):
        return re.reshape(data["shape"])
    im = np.array([float.fromhex(v) for v in data["im"]], dtype=float)
    return (re + 1j * im).reshape(data["shape"])
