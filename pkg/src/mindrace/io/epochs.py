from __future__ import annotations

import logging

import numpy as np

from ..core import EpochSet, LabelScheme, Recording

log = logging.getLogger(__name__)


def epoch_length(epoch_len_s: float, fs: float) -> int:
    return int(round(epoch_len_s * fs))


def epochs_from_events(r: Recording, scheme: LabelScheme, epoch_len_s: float = 4.0) -> EpochSet:
    """Cut one epoch per mapped event: samples ``[onset, onset + round(len*fs))``.

    Events whose label the scheme does not know are ignored; events whose
    epoch would run past the end of the recording are skipped with a warning.
    """
    L = epoch_length(epoch_len_s, r.fs)
    chunks, classes, onsets = [], [], []
    for ev in sorted(r.events, key=lambda e: e.onset):
        cls = scheme.class_of(ev.label)
        if cls is None:
            continue
        if ev.onset < 0 or ev.onset + L > r.n_samples:
            log.warning(
                "%s: skipping %r epoch at sample %d (needs %d samples, recording has %d)",
                r.subject_id or "recording", ev.label, ev.onset, L, r.n_samples,
            )
            continue
        chunks.append(r.data[:, ev.onset : ev.onset + L])
        classes.append(cls)
        onsets.append(ev.onset)
    data = np.stack(chunks) if chunks else np.zeros((0, r.n_channels, L))
    return EpochSet(
        data,
        np.asarray(classes, dtype=int),
        np.arange(len(classes)),
        r.fs,
        r.montage,
        r.subject_id,
        scheme.class_names,
    )


def concat_epochsets(sets) -> EpochSet:
    """Stack epoch sets from one subject (same montage, fs and length)."""
    sets = [s for s in sets if len(s)]
    if not sets:
        raise ValueError("no epochs to concatenate")
    first = sets[0]
    for s in sets[1:]:
        if s.montage != first.montage or s.fs != first.fs or s.n_samples != first.n_samples:
            raise ValueError("epoch sets differ in montage, sampling rate or epoch length")
    data = np.concatenate([s.data for s in sets])
    classes = np.concatenate([s.class_ids for s in sets])
    return EpochSet(data, classes, np.arange(len(classes)), first.fs, first.montage, first.subject_id, first.class_names)
