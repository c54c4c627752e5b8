import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping
from platformdirs import user_data_dir
from dqm.core.numeric import NumericPolicy
from dqm.domain.errors import InvalidPolicy


APP_NAME = "dqm"

ENV_PRECISION = "DQM_PRECISION"
ENV_IDENTITY_TOL = "DQM_IDENTITY_TOL"
ENV_POSITIVITY_TOL = "DQM_POSITIVITY_TOL"
ENV_TAIL_TOL = "DQM_TAIL_TOL"
ENV_OUTPUT_DIR = "DQM_OUTPUT_DIR"

# numeric options of single commands (kernel --t, --x)
COMMAND_OPTIONS = ("t", "x")


def _float_env(env: Mapping[str, str], name: str) -> float | None:
    raw = env.get(name)
    if raw is None or raw == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise InvalidPolicy(f"{name}={raw!r} is not a number")


def policy_from_env(env: Mapping[str, str] | None = None, **overrides: object) -> NumericPolicy:
    """Defaults, then environment, then explicit overrides (None means unset)."""
    env = os.environ if env is None else env
    from_env = {
        "precision": env.get(ENV_PRECISION) or None,
        "identity_tol": _float_env(env, ENV_IDENTITY_TOL),
        "positivity_tol": _float_env(env, ENV_POSITIVITY_TOL),
        "tail_tol": _float_env(env, ENV_TAIL_TOL),
    }
    return NumericPolicy().with_overrides(**from_env).with_overrides(**overrides)


def output_dir(explicit: str | Path | None = None, env: Mapping[str, str] | None = None) -> Path:
    env = os.environ if env is None else env
    if explicit:
        return Path(explicit)
    if env.get(ENV_OUTPUT_DIR):
        return Path(env[ENV_OUTPUT_DIR])
    return Path(user_data_dir(APP_NAME)) / "reports"


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation in canonical form."""
    command: str
    family: str | None = None
    parameters: tuple[tuple[str, float], ...] = ()
    levels: tuple[int, ...] = ()
    output_format: str = "json"
    tolerances: tuple[tuple[str, float], ...] = ()
    seed: int | None = None
    flags: tuple[str, ...] = ()
    options: tuple[tuple[str, float], ...] = ()

    @staticmethod
    def create(command: str, family: str | None = None, parameters: Mapping[str, float] | None = None,
               levels: tuple[int, ...] = (), output_format: str = "json",
               tolerances: Mapping[str, float | None] | None = None, seed: int | None = None,
               flags: tuple[str, ...] = (), options: Mapping[str, float] | None = None) -> "RunConfig":
        return RunConfig(
            command=command,
            family=family,
            parameters=tuple(sorted((k, float(v)) for k, v in (parameters or {}).items())),
            levels=tuple(levels),
            output_format=output_format,
            tolerances=tuple(sorted((k, float(v)) for k, v in (tolerances or {}).items() if v is not None)),
            seed=seed,
            flags=tuple(sorted(flags)),
            options=tuple(sorted((k, float(v)) for k, v in (options or {}).items())),
        )

    def to_args(self) -> list[str]:
        args = [self.command]
        if self.family is not None:
            args += ["--family", self.family]
        for name, value in self.parameters:
            args += ["--param", f"{name}={value!r}"]
        if self.levels:
            args += ["--levels", ",".join(str(d) for d in self.levels)]
        if self.output_format != "json":
            args += ["--format", self.output_format]
        for name, value in self.tolerances:
            args += [f"--{name.replace('_', '-')}", repr(value)]
        for name, value in self.options:
            args += [f"--{name}", str(int(value)) if value.is_integer() else repr(value)]
        if self.seed is not None:
            args += ["--seed", str(self.seed)]
        args += [f"--{flag}" for flag in self.flags]
        return args

    @staticmethod
    def from_args(args: list[str]) -> "RunConfig":
        """Inverse of to_args."""
        command, rest = args[0], list(args[1:])
        values: dict[str, object] = {"parameters": {}, "tolerances": {}, "options": {}, "flags": []}
        i = 0
        while i < len(rest):
            option = rest[i]
            if not option.startswith("--"):
                raise ValueError(f"unexpected argument {option!r}")
            key = option[2:]
            if key in ("special", "unsafe"):
                values["flags"].append(key)
                i += 1
                continue
            value = rest[i + 1]
            if key == "family":
                values["family"] = value
            elif key == "param":
                name, _, number = value.partition("=")
                values["parameters"][name] = float(number)
            elif key == "levels":
                values["levels"] = tuple(int(d) for d in value.split(","))
            elif key == "format":
                values["output_format"] = value
            elif key == "seed":
                values["seed"] = int(value)
            elif key in COMMAND_OPTIONS:
                values["options"][key] = float(value)
            else:
                values["tolerances"][key.replace("-", "_")] = float(value)
            i += 2
        return RunConfig.create(command, flags=tuple(values.pop("flags")), **values)
