"""
Suppressing one-frame false alarms with SORT
=============================================

A target drifts right; in one frame a speck appears far away. The speck
starts a track that is never updated again, so it is deleted before it can
be confirmed. The real target keeps a single identity throughout.
"""

from smalltarget.core import BBox, Detection, SortParams
from smalltarget.sort import SortTracker


def det(frame, x, y, size=5):
    b = BBox(x, y, x + size - 1, y + size - 1)
    return Detection(frame, b, b.center, 0.8, size * size)


tracker = SortTracker(SortParams(iou_min=0.3, max_age=1, min_hits=3))
for i in range(10):
    dets = [det(i, 20 + i, 40)]
    if i == 5:
        dets.append(det(i, 150, 10))
    reports = tracker.step(i, dets)
    shown = ", ".join(f"id {r.track_id} at x={r.bbox.x_min:.1f}" for r in reports)
    print(f"frame {i}: {len(dets)} detection(s) -> {shown or 'nothing reported'}")

# Without the warm-up allowance nothing is reported until min_hits updates.
strict = SortTracker(SortParams(warmup=False))
print("strict mode, first report at frame", next(i for i in range(10) if strict.step(i, [det(i, 20 + i, 40)])))
