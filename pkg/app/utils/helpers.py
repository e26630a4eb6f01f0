"""
Utility Functions
Status messages, JSON summaries and small parsing helpers shared by the CLI and services
"""
import json
import math
from typing import Any, Dict, List

import click
import numpy as np

_verbose = True


def set_verbose(enabled: bool):
    """Switch stderr status messages on or off"""
    global _verbose
    _verbose = bool(enabled)


def is_verbose() -> bool:
    return _verbose


def status(message: str, icon: str = '✅'):
    """Human-readable progress line on stderr"""
    if _verbose:
        click.echo(f'{icon} {message}', err=True)


def to_jsonable(value: Any) -> Any:
    """numpy scalars and arrays to plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def summary_line(record: Dict) -> str:
    """Single-line JSON, keys sorted"""
    return json.dumps(to_jsonable(record), sort_keys=True, separators=(',', ':'))


def emit_summary(record: Dict):
    """Command result on stdout"""
    click.echo(summary_line(record))


def parse_floats(text: str) -> List[float]:
    """'0.5,-1 2' -> [0.5, -1.0, 2.0]"""
    if text is None:
        return []
    parts = [p for p in text.replace(',', ' ').split() if p]
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise click.BadParameter(f'expected numbers, got {text!r}') from None


def parse_ids(text: str) -> List[int]:
    """'0-3,7' -> [0, 1, 2, 3, 7]"""
    ids = []
    for part in (p.strip() for p in text.split(',')):
        if not part:
            continue
        low, sep, high = part.partition('-')
        try:
            ids.extend(range(int(low), int(high) + 1) if sep else [int(low)])
        except ValueError:
            raise click.BadParameter(f'invalid id range {part!r}') from None
    return ids
