import os
from pathlib import Path

from dotenv import load_dotenv

# --- PROJECT ROOT ---
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
LOG_DIR = PROJECT_ROOT / "logs"
LOG_DIR.mkdir(exist_ok=True)
DATA_DIR = PROJECT_ROOT / "data"
DATA_DIR.mkdir(exist_ok=True)

# --- LOAD ENVIRONMENT VARIABLES ---
ENV_PATH = PROJECT_ROOT / ".env"
load_dotenv(ENV_PATH)

# --- RUN ENVIRONMENT ---
OUTPUT_ROOT = Path(os.getenv("CGO_OUTPUT_ROOT", str(DATA_DIR / "runs")))
DEFAULT_WORKERS = int(os.getenv("CGO_WORKERS", str(os.cpu_count() or 1)))
LOG_LEVEL = os.getenv("CGO_LOG_LEVEL", "INFO")
RUN_LOG_FILE = LOG_DIR / "runs.log"

# --- FIELD FILES ---
FIELD_MAGIC = b"CGOF"
FIELD_VERSION = 1
ORTHONORMAL_TOL = 1e-12
MIN_POINTS_PER_AXIS = 8

# --- FADDEEV OPERATOR PROBES ---
POWER_ITERATIONS = 20
PROBE_SEED = 20011123

# --- CGO SOLVER ---
GMRES_RESTART = 30
CGO_TOL = 1e-8
CGO_MAX_ITER = 600
# At most this many tolerance-tightening rounds when the PDE residual lags the Krylov one
CGO_TIGHTEN_ROUNDS = 4
EXCEPTIONAL_THRESHOLD = 1e-3
INDICATOR_ITERATIONS = 8
WEIGHT_GAMMA_CAP = 0.25

# --- SCATTERING ---
EPS_FACTOR = 0.25  # eps = sqrt(lambda) * dual_spacing * EPS_FACTOR
ANNULUS_INNER = 0.6  # fractions of L
ANNULUS_OUTER = 0.8
ASYMPTOTIC_FIT_MARGIN = 4  # extra harmonic degrees fitted beyond k_max
LS_TOL = 1e-10
LS_MAX_ITER = 600
UNITARITY_TOL = 1e-3
QUADRATURE_EXTRA_ORDER = 16

# --- RECONSTRUCTION ---
OVERFLOW_EXPONENT = 40.0
COMPLETION_BASIS_SIZE = 8
COMPLETION_REG_WEIGHT = 1e-8
SHELL_RELATIVE_TOL = 0.05
