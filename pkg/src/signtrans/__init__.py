"""Sign language translation from pose keypoints.

Pipeline stages: keypoint parsing and feature normalization, random
frame-skip sampling, encoder-decoder translation models on a small
reverse-mode autodiff core, the training recipe, and machine-translation
metrics, plus a synthetic corpus generator for end-to-end experiments.
"""

__version__ = "0.1.0"
