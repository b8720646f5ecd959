from dotenv import load_dotenv
import os
from pathlib import Path

# Load environment variables
load_dotenv()

# Logging
LOG_LEVEL = os.getenv("SKIPSNN_LOG_LEVEL", "INFO").upper()
LOG_DIR = Path(os.getenv("SKIPSNN_LOG_DIR", "logs"))
LOG_JSON = os.getenv("SKIPSNN_LOG_JSON", "False").lower() == "true"
LOG_TO_FILE = os.getenv("SKIPSNN_LOG_TO_FILE", "True").lower() == "true"

# Experiment outputs
RUNS_DIR = Path(os.getenv("SKIPSNN_RUNS_DIR", "runs"))

# Inference service
CHECKPOINT_PATH = os.getenv("SKIPSNN_CHECKPOINT")
API_HOST = os.getenv("API_HOST", "0.0.0.0")
API_PORT = int(os.getenv("API_PORT", "8000"))
DEBUG = os.getenv("DEBUG", "False").lower() == "true"
