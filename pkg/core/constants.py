"""
Constants and messages used throughout the application.
Centralized for easier maintenance and reusability.
"""

# ============================================================================
# ENVIRONMENT MESSAGES
# ============================================================================

SITE_COUNT_TOO_SMALL = 'Site count must be at least 2, got {n}'
PAIR_PROBABILITY_OUT_OF_RANGE = 'Pair probability must lie in [0, 1), got {p}'
UNKNOWN_FIGURE_CHARACTER = "Unknown figure character {char!r} at position {pos}"
ENVIRONMENT_INVALID = 'Environment violates {count} invariant(s): {first}'
F2_NOT_FOLLOWED_BY_F3 = 'F2 not followed by F3'
F3_NOT_PRECEDED_BY_F2 = 'F3 not preceded by F2'
FIGURE_COUNT_MISMATCH = 'Number of F2 ({f2}) differs from number of F3 ({f3})'
DEGREE_VIOLATION = 'Vertex {vertex} has in-degree {indeg} and out-degree {outdeg}'
CUT_VIOLATION = 'Cut after site {site} crossed by {right} rightward and {left} leftward edges'
WINDOW_TOO_LARGE = 'Window of {width} tiles does not fit in {tiles} tiles'
HALF_WINDOW_INVALID = 'Half-window l must be a positive integer, got {l!r}'
ENVIRONMENT_UNREADABLE = 'Cannot read environment file {path}: {reason}'

# ============================================================================
# MEASURE MESSAGES
# ============================================================================

UNKNOWN_JUMP_RATE = "Unknown jump rate {name!r}; choose one of {choices}"
FUGACITY_DIVERGES = 'Fugacity {phi} is outside the radius of convergence {phi_star}'
DENSITY_OUT_OF_RANGE = 'Density {rho} is outside the tabulated range [0, {rho_max}]'
JUMP_RATE_INVALID = 'Jump rate {name!r} must satisfy g(0)=0 and be nondecreasing'
NON_POSITIVE_GAMMA = 'gamma must be positive, got {gamma}'

# ============================================================================
# DYNAMICS MESSAGES
# ============================================================================

STATE_SPACE_TOO_LARGE = 'State space of {count} configurations exceeds the limit {limit}'
NOT_NORMALIZED = 'Distribution sums to {total}, expected 1'
NEGATIVE_FUNCTION = 'Function must be nonnegative on every state'
PARTICLES_NOT_CONSERVED = 'Particle count changed from {before} to {after}'
NEGATIVE_HORIZON = 'Macroscopic horizon must be nonnegative, got {t}'
CONFIGURATION_SIZE_MISMATCH = 'Configuration has {got} vertices, environment has {expected}'

# ============================================================================
# PDE MESSAGES
# ============================================================================

CFL_VIOLATED = 'dt={dt} exceeds the explicit stability bound {bound}'
NEWTON_DIVERGED = 'Newton iteration did not converge within {iterations} iterations'
LINEAR_ONLY = 'The exact Fourier solution only exists for the linear flux'
UNKNOWN_SCHEME = "Unknown scheme {scheme!r}"
UNKNOWN_PROFILE = "Cannot parse initial profile {expr!r}; use const:c or sine:a,b"

# ============================================================================
# ANALYSIS MESSAGES
# ============================================================================

EMPTY_SNAPSHOTS = 'At least one snapshot is required'
INPUT_UNREADABLE = 'Cannot read {path}: {reason}'
NOT_A_SNAPSHOT = '{path} is not a snapshot file'
NO_SNAPSHOTS_IN_DIR = 'No snapshot files in {directory}'
BLOCK_DOES_NOT_DIVIDE = 'Block size {b} does not divide the site count {n}'
DENSITY_TOUCHES_ZERO = 'Flux vanishes somewhere on the grid; F is singular'
CYLINDER_TOO_WIDE = 'Cylinder function spans {span} sites, more than the {n} available'
CYLINDER_TENSOR_TOO_LARGE = 'Quadrature over {vertices} vertices needs {size} terms'

# ============================================================================
# EXPERIMENT MESSAGES
# ============================================================================

UNKNOWN_EXPERIMENT = "Unknown experiment {kind!r}; choose one of {choices}"
PROFILE_BOUNDS_INVALID = 'Initial profile must satisfy 0 < K1 <= rho0 <= K2 <= {rho_max}, got [{k1}, {k2}]'
REPLICAS_INVALID = 'replicas must be at least 1, got {replicas}'
NO_GAMMA_CERTIFIED = 'No gamma down to {floor} certifies the inequality on the grid'

# ============================================================================
# ERROR KEYS
# ============================================================================

ERROR_KEY = 'error'
MESSAGE_KEY = 'message'
