"""
Sectioned config file ingestion.

The file is TOML with one table per concern; keys are the lower-case
Settings field names:

    [model]
    model = "boussinesq-scalar"
    mu = 0.012665147955292222

Sections are flattened before validation, so a key may live in any section.
Errors are reported as ``path:LINE: message``.
"""
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from config import Settings
from utils.errors import ConfigFileError

SECTIONS: Dict[str, List[str]] = {
    "model": ["MODEL", "MU", "NU", "RHO0", "SOBOLEV_M"],
    "truncation": ["K_THETA", "K_X", "N_GRID", "REFINEMENT_CHECK"],
    "lindstedt": ["LINDSTEDT_ORDER", "AMPLITUDES", "EPSILON", "EPSILON_GRID", "OMEGA"],
    "tolerances": ["TAU_PROJ", "TAU_FP", "TAU_TAIL", "TAU_AVG", "NEWTON_TOL", "RESIDUAL_FLOOR"],
    "schedule": ["DELTA1", "MAX_ITER", "FRAME_REFRESH", "HYPERBOLIC_SOLVER",
                 "RATE_THETA_SAMPLES", "CENTER_HORIZON", "PHASE_SHIFT", "ALIGN_TOL"],
    "output": ["OUT_DIR", "SEED", "THREADS", "FORCE"],
}


def _key_line(text: str, key: str) -> Optional[int]:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=", re.IGNORECASE)
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def _flatten(path: str, text: str, data: Dict[str, Any]) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    known = set(Settings.model_fields)
    for section, body in data.items():
        if not isinstance(body, dict):
            body = {section: body}
        for key, value in body.items():
            name = key.upper()
            if name not in known:
                line = _key_line(text, key) or 0
                raise ConfigFileError(f"{path}:{line}: unknown key '{key}' in section [{section}]")
            if name in flat:
                line = _key_line(text, key) or 0
                raise ConfigFileError(f"{path}:{line}: duplicate key '{key}'")
            flat[name] = value
    return flat


def load_settings(path: str, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """
    Build Settings from a sectioned TOML file.

    Args:
        path: Config file path
        overrides: Values taking precedence over the file (CLI flags)

    Returns:
        Validated Settings instance
    """
    file = Path(path)
    if not file.exists():
        raise ConfigFileError(f"{path}:0: config file not found")
    text = file.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = re.search(r"line (\d+)", str(e))
        line = match.group(1) if match else "0"
        raise ConfigFileError(f"{path}:{line}: {e}") from e

    flat = _flatten(path, text, data)
    flat.update(overrides or {})
    return build_settings(flat, path=path, text=text)


def build_settings(values: Dict[str, Any], path: str = "<cli>", text: str = "") -> Settings:
    """Validate flat values, mapping pydantic errors to line-precise messages."""
    try:
        return Settings(**values)
    except ValidationError as e:
        messages: List[str] = []
        for err in e.errors():
            loc = [str(part) for part in err.get("loc", ()) if str(part) in Settings.model_fields]
            key = loc[0] if loc else ""
            line = _key_line(text, key) if key and text else None
            messages.append(f"{path}:{line or 0}: {key.lower() or 'config'}: {err.get('msg')}")
        raise ConfigFileError("; ".join(messages)) from e


def _render(value: Any) -> str:
    if value is None:
        return '""  # unset'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, list):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    return repr(value)


def render_defaults(settings: Optional[Settings] = None) -> str:
    """Render settings in the sectioned format accepted by load_settings."""
    settings = settings or Settings()
    blocks: List[Tuple[str, List[str]]] = []
    for section, keys in SECTIONS.items():
        lines = []
        for key in keys:
            value = getattr(settings, key)
            rendered = _render(value)
            if value is None:
                lines.append(f"# {key.lower()} = {rendered}")
            else:
                lines.append(f"{key.lower()} = {rendered}")
        blocks.append((section, lines))
    return "\n\n".join(f"[{name}]\n" + "\n".join(lines) for name, lines in blocks) + "\n"
