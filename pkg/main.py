"""
Semilinear Controllability API
Runs the transport steering experiment and the nonlinearity probes over HTTP
"""
import logging
import traceback

from flask import Flask, request, jsonify
from flask_cors import CORS

from config.application import config
from config.transport import default_transport
from utils.errors import ConfigInvalid, DomainError
from utils.io import json_ready
from utils.transport import (
    build_transport_model,
    dissipativity_probe,
    lipschitz_sweep,
    steer_transport,
)

logging.basicConfig(level=config["log_level"].upper())
logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app, origins=config["origins"])

# Probe sizes accepted over HTTP; the CLI has no such limits
MAX_PAIRS = 100_000
MAX_M = 10 ** 12
# Steering sizes accepted over HTTP
MAX_CELLS = 512
MAX_HORIZON = 4.0
MAX_STEER_ITER = 1000


def _body():
    body = request.get_json(silent=True)
    if body is None:
        body = {}
    if not isinstance(body, dict):
        raise ConfigInvalid(["body: expected a JSON object"])
    return dict(body)


def _int_field(body, name, default, upper):
    value = body.get(name, default)
    if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= upper:
        raise ConfigInvalid([f"{name}: must be an integer in [1, {upper}]"])
    return value


def _steer_limits(body):
    """Refuse steering requests too large to answer synchronously"""
    errors = []
    n, T = body.get("n"), body.get("T")
    if isinstance(n, int) and n > MAX_CELLS:
        errors.append(f"n: at most {MAX_CELLS} cells over HTTP")
    if isinstance(T, (int, float)) and T > MAX_HORIZON:
        errors.append(f"T: at most {MAX_HORIZON} over HTTP")
    steering = body.get("steering")
    max_iter = steering.get("max_iter") if isinstance(steering, dict) else None
    if isinstance(max_iter, int) and max_iter > MAX_STEER_ITER:
        errors.append(f"steering.max_iter: at most {MAX_STEER_ITER} over HTTP")
    if errors:
        raise ConfigInvalid(errors)


@app.route("/", methods=["GET"])
def home():
    """Health check endpoint"""
    return jsonify({
        "status": "Online",
        "message": f"{config['name']} is ready!",
        "env": config["env"],
    })


@app.route("/steer", methods=["POST"])
def steer_endpoint():
    """
    Steer the transport model to its target
    Accepts a (partial) transport config as JSON, merged onto the default one
    """
    try:
        body = _body()
        body.pop("output_dir", None)
        _steer_limits(body)
        model = build_transport_model(body, default_transport)
        logger.info("Steering request n=%d T=%s", model.n, model.grid.T)
        result = steer_transport(model)
        return jsonify(json_ready({
            **result.summary(),
            "n": model.n,
            "T": model.grid.T,
            "target_norm": model.target.norm(),
        }))
    except ConfigInvalid as e:
        return jsonify(json_ready(e.to_dict())), 400
    except DomainError as e:
        return jsonify(json_ready(e.to_dict())), 422
    except Exception as e:
        print(f"Error during steering: {e}")
        print(traceback.format_exc())
        return jsonify({
            "error": str(e),
            "message": "An error occurred during steering"
        }), 500


@app.route("/probe", methods=["POST"])
def probe_endpoint():
    """
    Probe the transport nonlinearity
    Body: {"kind": "dissipative" | "lipschitz", "n", "pairs", "seed", "m_max"}
    """
    try:
        body = _body()
        kind = body.get("kind")
        n = _int_field(body, "n", default_transport["n"], 4096)
        if kind == "dissipative":
            seed = body.get("seed", config["seed"])
            if not isinstance(seed, int):
                raise ConfigInvalid(["seed: must be an integer"])
            report = dissipativity_probe(n, _int_field(body, "pairs", 1000, MAX_PAIRS), seed)
        elif kind == "lipschitz":
            report = lipschitz_sweep(n, _int_field(body, "m_max", 10_000, MAX_M))
        else:
            raise ConfigInvalid(["kind: must be 'dissipative' or 'lipschitz'"])
        return jsonify(json_ready(report.to_dict()))
    except ConfigInvalid as e:
        return jsonify(json_ready(e.to_dict())), 400
    except DomainError as e:
        return jsonify(json_ready(e.to_dict())), 422
    except Exception as e:
        print(f"Error during probe: {e}")
        print(traceback.format_exc())
        return jsonify({
            "error": str(e),
            "message": "An error occurred while probing"
        }), 500


if __name__ == "__main__":
    app.run(host="0.0.0.0", port=5000, debug=config["debug"])
