import math
import os

# Trading session: 9:30 to 16:00 sampled every second
SESSION_OPEN = "09:30:00"
SESSION_CLOSE = "16:00:00"
SESSION_SECONDS = 23400

# Spot estimates are reported on this grid unless told otherwise
DEFAULT_GRID_STEP = 60.0
# Return horizon of the empirical pipeline
DEFAULT_RETURN_HORIZON = 300.0

INITIAL_LOG_PRICE = math.log(100.0)

# Closed forms are only trusted when |sin(x/2)| exceeds this
SINGULAR_THRESHOLD = 1e-8
IMAGINARY_TOLERANCE = 1e-10
QUADRATURE_POINTS = 2 ** 16

PLUGIN_FLOOR = 1e-12

# Descent defaults
DEFAULT_C_LAMBDA = 500.0
DEFAULT_THRESHOLD = 1e-3
DEFAULT_MAX_ITERS = 100_000
MAX_BACKTRACKS = 60

# Two-sided 95% Normal quantile
NORMAL_Q975 = 1.959963984540054

OUTPUT_DIR_ENV = "SPOTVOL_OUTPUT_DIR"
DEFAULT_OUTPUT_PATH = os.path.join(os.getcwd(), 'output')
MANIFEST_FILE_NAME = "manifest.json"
