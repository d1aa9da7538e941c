"""Class mapping and subject exclusions for the public 109-subject MI dataset.

Run layout: 1-2 baselines; 3/7/11 executed left/right fist; 4/8/12 imagined
left/right fist; 5/9/13 executed both fists/feet; 6/10/14 imagined both
fists/feet. Only the four imagined classes are kept.
"""

from __future__ import annotations

import re
from dataclasses import replace
from pathlib import Path

_IMAGINED_LR = {4, 8, 12}
_IMAGINED_HF = {6, 10, 14}
_FILE_RE = re.compile(r"^S(\d{3})R(\d{2})$", re.IGNORECASE)

# 89: wrong labels; 88/92/100: different timing and a 128 Hz sampling rate
EXCLUDED_SUBJECTS = frozenset({88, 89, 92, 100})


def excluded_subjects() -> frozenset[int]:
    return EXCLUDED_SUBJECTS


def physionet_class_map(run_index: int, annotation_label: str) -> str | None:
    """Class name for an annotation in a given run, or None if not an MI class."""
    if not 1 <= run_index <= 14:
        raise ValueError(f"run index must be in [1, 14], got {run_index}")
    if run_index in _IMAGINED_LR:
        return {"T1": "LeftHand", "T2": "RightHand"}.get(annotation_label)
    if run_index in _IMAGINED_HF:
        return {"T1": "BothHands", "T2": "BothLegs"}.get(annotation_label)
    return None


def parse_run_filename(path) -> tuple[int, int] | None:
    """``S001R04.edf`` -> ``(1, 4)``; None for other names."""
    m = _FILE_RE.match(Path(path).stem)
    if m is None:
        return None
    return int(m.group(1)), int(m.group(2))


def relabel_physionet(rec, run_index: int):
    """Replace T0/T1/T2 annotations with class names; non-MI events are dropped."""
    events = []
    for e in rec.events:
        name = physionet_class_map(run_index, e.label)
        if name is not None:
            events.append(replace(e, label=name))
    return replace(rec, events=tuple(events))
