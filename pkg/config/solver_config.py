"""
Solver Configuration Settings
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _float_env(name: str, default: float) -> float:
    """Read a float setting, failing loudly on garbage"""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} environment variable must be a number, got {raw!r}")


def _int_env(name: str, default: int) -> int:
    """Read an integer setting, failing loudly on garbage"""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} environment variable must be an integer, got {raw!r}")


# Stepper defaults
DEFAULT_DT = _float_env('DELAYSIM_DEFAULT_DT', 0.01)
PICARD_TOL = _float_env('DELAYSIM_PICARD_TOL', 1e-10)
PICARD_MAX_ITER = _int_env('DELAYSIM_PICARD_MAX_ITER', 50)
BLOWUP_NORM = _float_env('DELAYSIM_BLOWUP_NORM', 1e8)

if DEFAULT_DT <= 0:
    raise ValueError("DELAYSIM_DEFAULT_DT must be positive")
if PICARD_MAX_ITER < 1:
    raise ValueError("DELAYSIM_PICARD_MAX_ITER must be at least 1")

# Quadrature
QUADRATURE_NODES = _int_env('DELAYSIM_QUADRATURE_NODES', 32)

# Tolerances
TRANSFORM_TOLERANCE = 1e-12
CONSTRAINT_TOLERANCE = 1e-10
SCHEME_TOLERANCE = 1e-7
QUASIPOSITIVITY_TOLERANCE = 1e-12
BOUND_SLACK = 1e-9
NORMALIZATION_TOLERANCE = 1e-12
EDGE_TOLERANCE = 1e-12

# Subtangential condition ladder and verdict thresholds
H_LADDER = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
H_MIN = 1e-8
SATISFIED_RATIO = 1e-6
VIOLATED_RATIO = 1e-2

# Waveform relaxation oracle
ORACLE_GRID_N = 1024
ORACLE_MIN_GRID_N = 64
ORACLE_TOL = 1e-12
ORACLE_MAX_SWEEPS = 200

# Probe generation
PROBE_COUNT = 20
MUTATION_COUNT = 100
BOUNDARY_PROBE_COUNT = 50
PROBE_KNOTS = 9
PERTURBATION_COUNT = 20
PERTURBATION_MAGNITUDE = 1e-3

# Output
OUTPUT_DIR = os.getenv('DELAYSIM_OUTPUT_DIR', 'output')
DEFAULT_SEED = _int_env('DELAYSIM_SEED', 12345)
FLOAT_FORMAT = '.17g'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
TRAJECTORY_HEADER = ['time', 'species', 'mode_or_point', 'value']


class Config:
    """Base configuration class"""
    DEBUG = False
    TESTING = False
    LOG_LEVEL = os.getenv('DELAYSIM_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('DELAYSIM_LOG_FILE')
    OUTPUT_DIR = OUTPUT_DIR
    MAX_WORKERS = _int_env('DELAYSIM_MAX_WORKERS', 1)


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True
    LOG_LEVEL = os.getenv('DELAYSIM_LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration"""
    LOG_FILE = os.getenv('DELAYSIM_LOG_FILE', 'delaysim.log')
    MAX_WORKERS = _int_env('DELAYSIM_MAX_WORKERS', 4)


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    LOG_LEVEL = os.getenv('DELAYSIM_LOG_LEVEL', 'WARNING')
    LOG_FILE = None


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config():
    """Get the current configuration based on environment"""
    env = os.getenv('DELAYSIM_ENV', 'development')
    return config.get(env, config['default'])


# Exit statuses
EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2

SUBCOMMANDS = ('solve', 'verify', 'invariance', 'dependence', 'checks')

# Run config validation rules
RUN_CONFIG_RULES = {
    'required_sections': ['model'],
    'sections': {
        'model': ['preset', 'params', 'inline'],
        'grid': ['domain', 'length', 'n_modes', 'n_collocation', 'boundary'],
        'initial': ['kind', 'value', 'slope', 'intercept', 'knots', 'amplitude'],
        'stepper': ['scheme', 'dt', 'end_time', 'picard_tol', 'picard_max_iter', 'blowup_norm',
                    'check_extension'],
        'constraint': ['kind', 'lower', 'upper', 'times', 'tolerance'],
        'probes': ['count', 'mutations', 'boundary_probes', 'h_values', 'radius', 'knots'],
        'verify': ['grid_n', 'tol', 'max_sweeps', 'end_time', 'dts', 'scheme', 'norm', 'tolerance'],
        'dependence': ['count', 'magnitude', 'end_time', 'max_workers'],
        'output': ['representation', 'prefix'],
    },
    'scalars': ['seed'],
    'positive': [
        ('grid', 'length'), ('grid', 'n_modes'), ('grid', 'n_collocation'),
        ('stepper', 'dt'), ('stepper', 'picard_tol'), ('stepper', 'picard_max_iter'),
        ('stepper', 'blowup_norm'), ('constraint', 'tolerance'),
        ('probes', 'count'), ('probes', 'mutations'), ('probes', 'boundary_probes'),
        ('probes', 'radius'), ('probes', 'knots'),
        ('verify', 'grid_n'), ('verify', 'tol'), ('verify', 'max_sweeps'), ('verify', 'tolerance'),
        ('dependence', 'count'), ('dependence', 'magnitude'), ('dependence', 'max_workers'),
        ('model', 'params', 'delay_horizon'),
    ],
    'choices': {
        ('grid', 'domain'): ['interval', 'point'],
        ('grid', 'boundary'): ['dirichlet', 'neumann', 'none'],
        ('stepper', 'scheme'): ['frozen_b', 'picard'],
        ('verify', 'scheme'): ['frozen_b', 'picard'],
        ('verify', 'norm'): ['sup', 'l2_time'],
        ('constraint', 'kind'): ['nonneg_cone', 'box', 'time_indexed_box', 'none'],
        ('initial', 'kind'): ['constant', 'linear', 'random', 'knots'],
        ('output', 'representation'): ['spectral', 'collocation'],
    },
}

# Error Messages
ERROR_MESSAGES = {
    'config_not_found': 'Run config file not found',
    'config_not_object': 'Run config must be a JSON object',
    'unknown_key': 'Unknown key',
    'missing_section': 'Missing required section',
    'not_positive': 'Value must be a positive number',
    'bad_choice': 'Value must be one of',
    'unknown_preset': 'Unknown model preset',
    'model_source': "Model needs exactly one of 'preset' or 'inline'",
}
