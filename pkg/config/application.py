from os import getenv
from pathlib import Path
from dotenv import load_dotenv

base_path = Path(".")  # Project root
env_path = base_path / ".env"  # Optional environment file

load_dotenv(dotenv_path=env_path)

config = {
    # --------------------------------------------------------------------------
    # Application Name
    # --------------------------------------------------------------------------
    #
    # Reported by the health check and in the summary of every run.
    "name": getenv("APP_NAME", "semilinear-controllability"),
    # --------------------------------------------------------------------------
    # Application Environment
    # --------------------------------------------------------------------------
    #
    # The environment the application is running in. Set this in your ".env"
    # file; anything other than "production" enables debug logging by default.
    "env": getenv("APP_ENV", "production"),
    # --------------------------------------------------------------------------
    # Application Debug Mode
    # --------------------------------------------------------------------------
    #
    # When enabled the web server runs with Flask's debugger and reloader.
    "debug": getenv("APP_DEBUG", "false").lower() in ("1", "true", "yes"),
    # --------------------------------------------------------------------------
    # Log Level
    # --------------------------------------------------------------------------
    #
    # Verbosity of the numerical package. DEBUG prints every steering
    # iteration and every Gramian assembly. Defaults to INFO in production
    # and DEBUG in any other environment.
    "log_level": getenv(
        "LOG_LEVEL", "INFO" if getenv("APP_ENV", "production") == "production" else "DEBUG"
    ),
    # --------------------------------------------------------------------------
    # Output Directory
    # --------------------------------------------------------------------------
    #
    # Where the command line writes trajectory.csv, control.csv, summary.json
    # and probes.json unless --out or the experiment config says otherwise.
    "output_dir": getenv("OUTPUT_DIR", "out"),
    # --------------------------------------------------------------------------
    # Default Seed
    # --------------------------------------------------------------------------
    #
    # Seed for every sampled probe when neither the experiment config nor
    # --seed provides one.
    "seed": int(getenv("DEFAULT_SEED", "2024")),
    # --------------------------------------------------------------------------
    # Cross-Origin Resource Sharing (CORS)
    # --------------------------------------------------------------------------
    #
    # The origin, or list of origins to allow requests from. The origin(s) may be
    # regular expressions, case-sensitive strings, or else an asterisk
    "origins": getenv("CORS_DOMAINS", "*"),
}
