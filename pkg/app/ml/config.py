"""
ML Configuration
Centralized constants for the lollipop data, model building and fitting
"""
import math

VERSION = '1.0.0'

# Feature classes, in data-vector order
FEATURE_CLASSES = ('shape', 'pose', 'intensity')
CHANNELS_PER_CLASS = {'shape': 3, 'pose': 3, 'intensity': 1}

# Pose representations
POSE_MODES = ('edr', 'sr', 'pdm')
DEFAULT_POSE_MODE = 'edr'

# Lollipop primitive (dimensionless units)
STICK_LENGTH = 10.0
STICK_RADIUS = 1.0
HEAD_RADIUS = 2.5          # equatorial semi-axis of the head ellipsoid
DEFAULT_RESOLUTION = 2     # subdivision level

# Training dataset: (r1, r2, r3) = (r, 31 - r, 17 - r), r = 1..15
SHAPE_SPAN = tuple(float(r) for r in range(1, 16))
R2_OFFSET = 31.0
R3_OFFSET = 17.0
REFERENCE_R = 8.0

# yz-plane motion, paired by position
THETA2_ANGLES = (math.pi / 5, 2 * math.pi / 5, 3 * math.pi / 5, 4 * math.pi / 5)
THETA3_ANGLES = (math.pi / 2, math.pi / 3, 2 * math.pi / 9, math.pi / 9)

# Held-out poses for generalization experiments (between the training angles)
HELD_OUT_THETA2 = (3 * math.pi / 10, math.pi / 2, 7 * math.pi / 10)
HELD_OUT_THETA3 = (5 * math.pi / 12, 5 * math.pi / 18, math.pi / 6)

# Rendering
TARGET_VOXELS_PER_AXIS = 64
VOLUME_MARGIN = 2.0

# Model building
AUTO_RANK_FRACTION = 0.98
RANK_TOLERANCE = 1e-12
INTERPOLATION_EXPANSION = 2.0

# Fitting
PROPOSAL_SCALES = (0.05, 0.2)
PROPOSAL_WEIGHTS = (0.8, 0.2)
# Per-mode steps equalize the feature-space move of every mode, up to this ratio
MAX_STEP_RATIO = 10.0
# Principal-geodesic offsets scored for a warm start
START_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
START_MODES = ('mean', 'geodesic')
DEFAULT_SIGMA_FRACTION = 0.1
DEFAULT_ITERATIONS = 5000

# Published lollipop correlations, |r| as fractions
CORRELATION_PAIRS = (
    ('r1', 'd1'), ('r2', 'd2'), ('r3', 'd3'),
    ('theta2', 'theta3'), ('r1', 'r2'), ('r2', 'r3'),
)
PUBLISHED_TRAINING = (0.46, 0.92, 0.96, 0.60, 0.99, 0.93)
PUBLISHED_MODEL = (0.56, 0.92, 0.93, 0.53, 0.98, 0.91)


def pair_name(pair) -> str:
    """Column label for a correlation pair"""
    return f'{pair[0]}_vs_{pair[1]}'
