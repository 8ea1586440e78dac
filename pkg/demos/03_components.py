"""
From a binary mask to one detection per frame
==============================================

Thresholded pixels are dilated to knit nearby fragments together, labeled as
8-connected components, filtered by area, and the brightest survivor wins.
"""

import numpy as np

from smalltarget.cc import dilate, label_components, rule_filter, select_targets

mask = np.zeros((40, 40), bool)
mask[10, 10] = mask[11, 12] = True   # two fragments of one target
mask[30, 30] = True                  # an isolated pixel elsewhere
mask[2:30, 35:38] = True             # a long streak, too big to be a target

frame = np.zeros((40, 40))
frame[10, 10], frame[30, 30], frame[5, 36] = 0.9, 0.6, 1.0

dilated = dilate(mask, 5)
comps = label_components(dilated, frame)
for c in comps:
    print(f"label {c.label}: area {c.area:4d}, bbox {c.bbox.as_tuple()}, brightest {c.max_intensity}")

kept = rule_filter(comps, 1, 100)
print("after the 1 < area < 100 rule:", [c.label for c in kept])
print("selected:", select_targets(kept, top_n=1, frame_index=0))
