import os
from pydantic import BaseModel
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Settings(BaseModel):
    """Application settings."""

    # Arithmetic
    DEFAULT_MODE: str = os.getenv("DMDP_MODE", "exact")
    FLOAT_EPSILON: float = float(os.getenv("DMDP_FLOAT_EPSILON", "1e-9"))

    # Solver limits
    ORACLE_MAX_N: int = int(os.getenv("DMDP_ORACLE_MAX_N", "14"))

    # Experiment settings
    TIMING_REPETITIONS: int = int(os.getenv("DMDP_TIMING_REPETITIONS", "3"))
    REWARD_RESOLUTION: int = int(os.getenv("DMDP_REWARD_RESOLUTION", "1000000"))
    CSV_SCHEMA_VERSION: str = "1"

    # Logging
    LOG_LEVEL: str = os.getenv("DMDP_LOG_LEVEL", "INFO")

    # API server
    API_HOST: str = os.getenv("DMDP_API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("DMDP_API_PORT", "8000"))

    # Application settings
    APP_NAME: str = "DMDP Solver Suite"
    VERSION: str = "1.0.0"

    class Config:
        case_sensitive = True

# Create settings instance
settings = Settings()
