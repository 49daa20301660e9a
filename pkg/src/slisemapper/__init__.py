__all__ = [
    "baselines",
    "cli",
    "clustering",
    "data",
    "engine",
    "errors",
    "evaluation",
    "hungarian",
    "lbfgs",
    "local_models",
    "logging_utils",
    "plotting",
    "storage",
    "synth",
    "types",
    "utils",
]
