import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from painleve_atlas.models import PoleEvent


def jsonable(value: Any) -> Any:
    """Complex numbers become [re, im]; non-finite floats become null."""
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "model_dump"):
        return jsonable(value.model_dump())
    if hasattr(value, "item"):
        # numpy scalars
        return jsonable(value.item())
    return value


def write_json(path: Path, payload: Any):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")


def write_report(path: Path, command: str, report: Dict[str, Any],
                 config: Optional[Dict[str, Any]] = None, errors: Optional[List[str]] = None,
                 partial: Optional[str] = None):
    write_json(path, {
        "command": command,
        "config": config or {},
        "report": report,
        "errors": errors or [],
        "partial": partial,
    })


def pole_event_records(events: List[PoleEvent]) -> List[Dict[str, Any]]:
    return [{"zeta_re": ev.zeta.real, "zeta_im": ev.zeta.imag, "a_re": ev.a.real, "a_im": ev.a.imag,
             "step_index": ev.step_index} for ev in events]


def write_pole_events_json(path: Path, events: List[PoleEvent]):
    write_json(path, pole_event_records(events))
