from config.application import config

# The transport experiment run when no --config is given. Partial configs
# (files or request bodies) are merged onto this dict key by key.
default_transport = {
    "n": 64,
    "T": 1.25,
    "m_profile": {"kind": "constant", "value": 1.0},
    "target": {"kind": "sine", "k": 1},
    "initial": {"kind": "zero"},
    "control_amplitude": 0.0,
    "steering": {
        "max_iter": 200,
        "relaxation": 1.0,
        "tol_fixed_point": 1e-8,
        "tol_terminal": 5e-9,
        "divergence_factor": 1e6,
        "stagnation_window": 25,
    },
    "seed": config["seed"],
    "output_dir": config["output_dir"],
}
