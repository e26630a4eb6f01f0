"""
Application Configuration
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """Base configuration"""
    DATA_DIR = os.getenv('DMFC_DATA_DIR', os.path.join('instance', 'data'))
    SEED = int(os.getenv('DMFC_SEED', '42'))
    VERBOSE = _flag('DMFC_VERBOSE', '1')
    N_JOBS = int(os.getenv('DMFC_N_JOBS', '1'))

    # Defaults for commands when neither flags nor a config file set them
    RESOLUTION = 2
    ITERATIONS = 5000
    SAMPLES = 100

    @classmethod
    def to_dict(cls):
        return {k: getattr(cls, k) for k in dir(cls) if k.isupper()}


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration"""
    DEBUG = False
    VERBOSE = _flag('DMFC_VERBOSE', '0')


class TestingConfig(Config):
    """Testing configuration: quiet, small defaults"""
    DEBUG = True
    TESTING = True
    VERBOSE = False
    RESOLUTION = 1
    ITERATIONS = 200
    SAMPLES = 30


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}
