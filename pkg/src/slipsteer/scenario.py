"""Run configuration: vehicle sets, path, controller, disturbances, profile.

Scenarios are plain dataclasses, loadable from an INI-style config file
with sections [run], [vehicle], [path], [controller], [observer],
[speed], [disturbances], [initial].  The grammar is documented in the
README; parse errors name the offending section and field.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

from . import paths as pathmod
from .kinematic import KinGains
from .observer import HgoConfig
from .vehicle import ESTIMATED_PARAMS, NOMINAL_PARAMS, VehicleParams

CONTROLLERS = ("A", "B", "PROP", "PROP-S")


class ConfigError(ValueError):
    """Scenario file failed validation; message names section and field."""


@dataclass(frozen=True)
class SpeedProfile:
    """Piecewise-linear speed schedule; holds the last value."""

    points: tuple[tuple[float, float], ...] = ((0.0, 0.0), (5.0, 10.0))

    def __post_init__(self) -> None:
        ts = [t for t, _ in self.points]
        if len(ts) < 1 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("[speed] profile: times must be strictly increasing")
        if any(v < 0.0 for _, v in self.points):
            raise ConfigError("[speed] profile: speeds must be non-negative")

    def v(self, t: float) -> float:
        pts = self.points
        if t <= pts[0][0]:
            return pts[0][1]
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t <= t1:
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        return pts[-1][1]

    def v_dot(self, t: float) -> float:
        pts = self.points
        if t <= pts[0][0] or t >= pts[-1][0]:
            return 0.0
        for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
            if t < t1:
                return (v1 - v0) / (t1 - t0)
        return 0.0

    @property
    def v_max(self) -> float:
        return max(v for _, v in self.points)


@dataclass(frozen=True)
class Disturbances:
    slope_grade: float = 0.0      # lateral gravity fraction (10% grade = 0.10)
    yaw_noise_std: float = 0.005  # yaw-rate sensor noise, rad/s
    pose_noise_std: float = 0.0   # position measurement noise, m (terrain stand-in)
    kick_time: float | None = None
    kick_y: float = 0.0           # instantaneous lateral displacement at kick_time
    delta_beta: float = 0.0       # constant injected sideslip-rate disturbance
    delta_r: float = 0.0          # constant injected yaw-accel disturbance


@dataclass(frozen=True)
class Scenario:
    name: str = "run"
    path_name: str = "l_path"
    segments: tuple[pathmod.PathSegment, ...] | None = None
    truth_params: VehicleParams = NOMINAL_PARAMS
    model_params: VehicleParams = NOMINAL_PARAMS
    controller: str = "PROP"
    kin_gains: KinGains = KinGains()
    c_mode: str = "prop6"           # constant | ramp | prop6
    c0_mode: str = "fixed"          # fixed | solve
    dyn_T_s: float = 1.0
    design_speed_range: tuple[float, float] | None = None
    observer: HgoConfig = HgoConfig()
    feedback: str = "output"        # output | state
    speed: SpeedProfile = SpeedProfile()
    disturbances: Disturbances = Disturbances()
    y_e0: float = 0.5
    theta_e0: float = 0.0
    observer_init: tuple[float, float] = (0.0, 0.0)  # cold-start (r_hat, beta_hat)
    dt: float = 0.01
    duration: float | None = None   # None: run to path end
    seed: int = 0

    def __post_init__(self) -> None:
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"[run] controller must be one of {CONTROLLERS}")
        if not 0.0 < self.dt <= 0.05:
            raise ConfigError("[run] dt must be in (0, 0.05]")
        if self.feedback not in ("output", "state"):
            raise ConfigError("[run] feedback must be 'output' or 'state'")
        if self.c_mode not in ("constant", "ramp", "prop6"):
            raise ConfigError("[controller] c_mode must be constant|ramp|prop6")
        if self.c0_mode not in ("fixed", "solve"):
            raise ConfigError("[controller] c0_mode must be fixed|solve")

    def build_path(self) -> pathmod.Path:
        if self.segments is not None:
            return pathmod.build_path(list(self.segments))
        try:
            return pathmod.PATHS[self.path_name]()
        except KeyError:
            raise ConfigError(f"[path] unknown path name {self.path_name!r}") from None

    @property
    def speed_range(self) -> tuple[float, float]:
        if self.design_speed_range is not None:
            return self.design_speed_range
        v_max = max(self.speed.v_max, 2.0)
        return (0.8 * v_max, v_max)

    def manifest_hash(self) -> str:
        """Stable digest of everything that determines the run output."""
        payload = json.dumps(_scenario_dict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def rainy(scn: Scenario) -> Scenario:
    """Weather preset: the road degrades, the controller's belief does not."""
    truth = scn.truth_params.scaled(mu=0.5, stiffness_scale=0.7)
    return replace(scn, truth_params=truth, name=scn.name + "_rainy")


def _scenario_dict(scn: Scenario) -> dict:
    d = {
        "name": scn.name, "path": scn.path_name, "controller": scn.controller,
        "c_mode": scn.c_mode, "c0_mode": scn.c0_mode, "dyn_T_s": scn.dyn_T_s,
        "feedback": scn.feedback, "dt": scn.dt, "duration": scn.duration,
        "seed": scn.seed, "y_e0": scn.y_e0, "theta_e0": scn.theta_e0,
        "speed": list(scn.speed.points),
        "truth": vars(scn.truth_params).copy(),
        "model": vars(scn.model_params).copy(),
        "kin": {k: getattr(scn.kin_gains, k) for k in (
            "c0", "c_ss", "t_end", "K_i", "psi_kin", "eps_kin", "a1", "k1", "k2",
            "K_F", "r_threshold_cap")},
        "observer": {"alpha1": scn.observer.alpha1, "alpha2": scn.observer.alpha2,
                     "eps": scn.observer.eps, "init": list(scn.observer_init)},
        "disturbances": vars(scn.disturbances).copy(),
        "design_speed_range": scn.design_speed_range,
    }
    if scn.segments is not None:
        d["segments"] = [(s.kind, s.length, s.kappa_start, s.kappa_end)
                         for s in scn.segments]
    return d


# --- INI loading -----------------------------------------------------------

_PARAM_SETS = {"nominal": NOMINAL_PARAMS, "estimated": ESTIMATED_PARAMS}


def _get(cp: configparser.ConfigParser, section: str, key: str, conv, default):
    if not cp.has_option(section, key):
        if default is _REQUIRED:
            raise ConfigError(f"[{section}] missing required field '{key}'")
        return default
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] field '{key}': {exc}") from None


_REQUIRED = object()


def _parse_segments(raw: str) -> tuple[pathmod.PathSegment, ...]:
    segs = []
    for idx, chunk in enumerate(s.strip() for s in raw.split(";") if s.strip()):
        tokens = chunk.split()
        kind, kv = tokens[0].lower(), {}
        for tok in tokens[1:]:
            if "=" not in tok:
                raise ValueError(f"segment {idx}: expected key=value, got {tok!r}")
            k, v = tok.split("=", 1)
            kv[k.lower()] = float(v)
        if kind == "line":
            segs.append(pathmod.line(kv["length"]))
        elif kind == "arc":
            segs.append(pathmod.arc(kv["radius"], length=kv.get("length"),
                                    angle_deg=kv.get("angle_deg")))
        elif kind == "clothoid":
            segs.append(pathmod.clothoid(kv["k0"], kv["k1"], kv["length"]))
        else:
            raise ValueError(f"segment {idx}: unknown kind {kind!r}")
    if not segs:
        raise ValueError("no segments given")
    return tuple(segs)


def _parse_profile(raw: str) -> SpeedProfile:
    pts = []
    for chunk in (s.strip() for s in raw.split(",") if s.strip()):
        t, v = chunk.split(":")
        pts.append((float(t), float(v)))
    return SpeedProfile(tuple(pts))


def _parse_params(cp: configparser.ConfigParser, section: str, key: str,
                  default: VehicleParams) -> VehicleParams:
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip()
    if raw in _PARAM_SETS:
        return _PARAM_SETS[raw]
    try:
        kv = dict(tok.split("=", 1) for tok in raw.split())
        return VehicleParams(**{k: float(v) for k, v in kv.items()})
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"[{section}] field '{key}': {exc}") from None


def load_scenario(path: str) -> Scenario:
    """Parse a scenario config file; raises ConfigError naming bad fields."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read scenario file {path!r}")

    name = _get(cp, "run", "name", str, "run")
    controller = _get(cp, "run", "controller", str, _REQUIRED)
    dt = _get(cp, "run", "dt", float, 0.01)
    duration = _get(cp, "run", "duration", float, None)
    seed = _get(cp, "run", "seed", int, 0)
    feedback = _get(cp, "run", "feedback", str, "output")

    segments = None
    path_name = _get(cp, "path", "name", str, "l_path")
    if cp.has_option("path", "segments"):
        segments = _get(cp, "path", "segments", _parse_segments, None)

    truth = _parse_params(cp, "vehicle", "truth", NOMINAL_PARAMS)
    model = _parse_params(cp, "vehicle", "model", NOMINAL_PARAMS)

    kin_kwargs = {}
    for key in ("c0", "c_ss", "t_end", "K_i", "psi_kin", "eps_kin", "a1",
                "k1", "k2", "K_F", "r_threshold_cap"):
        if cp.has_option("controller", key):
            kin_kwargs[key] = _get(cp, "controller", key, float, _REQUIRED)
    try:
        kin = KinGains(**kin_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[controller] {exc}") from None

    obs = HgoConfig(
        alpha1=_get(cp, "observer", "alpha1", float, 2.0),
        alpha2=_get(cp, "observer", "alpha2", float, 1.0),
        eps=_get(cp, "observer", "eps", float, 0.05),
    )
    obs_init = (_get(cp, "observer", "r_hat0", float, 0.0),
                _get(cp, "observer", "beta_hat0", float, 0.0))
    dist = Disturbances(
        slope_grade=_get(cp, "disturbances", "slope_grade", float, 0.0),
        yaw_noise_std=_get(cp, "disturbances", "yaw_noise_std", float, 0.005),
        pose_noise_std=_get(cp, "disturbances", "pose_noise_std", float, 0.0),
        kick_time=_get(cp, "disturbances", "kick_time", float, None),
        kick_y=_get(cp, "disturbances", "kick_y", float, 0.0),
        delta_beta=_get(cp, "disturbances", "delta_beta", float, 0.0),
        delta_r=_get(cp, "disturbances", "delta_r", float, 0.0),
    )
    speed = _get(cp, "speed", "profile", _parse_profile, SpeedProfile())
    rng_lo = _get(cp, "controller", "design_v_lo", float, None)
    rng_hi = _get(cp, "controller", "design_v_hi", float, None)
    design_range = (rng_lo, rng_hi) if rng_lo is not None and rng_hi is not None else None

    scn = Scenario(
        name=name, path_name=path_name, segments=segments,
        truth_params=truth, model_params=model, controller=controller,
        kin_gains=kin,
        c_mode=_get(cp, "controller", "c_mode", str, "prop6"),
        c0_mode=_get(cp, "controller", "c0_mode", str, "fixed"),
        dyn_T_s=_get(cp, "controller", "dyn_t_s", float, 1.0),
        design_speed_range=design_range,
        observer=obs, observer_init=obs_init, feedback=feedback, speed=speed,
        disturbances=dist,
        y_e0=_get(cp, "initial", "y_e0", float, 0.5),
        theta_e0=_get(cp, "initial", "theta_e0", float, 0.0),
        dt=dt, duration=duration, seed=seed,
    )
    if _get(cp, "run", "preset", str, "clear") == "rainy":
        scn = rainy(scn)
    return scn


# --- canonical study scenarios --------------------------------------------

def l_path_scenario(controller: str = "PROP", v_ss: float = 7.0,
                    seed: int = 0) -> Scenario:
    return Scenario(name=f"l_path_{controller.lower()}", path_name="l_path",
                    controller=controller, seed=seed,
                    speed=SpeedProfile(((0.0, 0.0), (5.0, v_ss))))


def s_path_scenario(controller: str = "PROP", v_ss: float = 7.0,
                    seed: int = 0) -> Scenario:
    return Scenario(name=f"s_path_{controller.lower()}", path_name="s_path",
                    controller=controller, seed=seed,
                    speed=SpeedProfile(((0.0, 0.0), (5.0, v_ss))))


def comprehensive_scenario(controller: str = "PROP-S", seed: int = 0) -> Scenario:
    """High-speed course: ramp to 10 m/s, hold through the arc entry, then
    drift between 8 and 10 as a manual speed hold would.

    Position noise stands in for the loose, uneven surface of the test
    yard; the gain ramp runs with the speed ramp so the startup stays
    graceful.
    """
    profile = SpeedProfile(((0.0, 0.0), (5.0, 10.0), (17.0, 10.0), (25.0, 8.0),
                            (33.0, 10.0), (41.0, 8.5)))
    return Scenario(name=f"comprehensive_{controller.lower()}",
                    path_name="comprehensive", controller=controller, seed=seed,
                    speed=profile, design_speed_range=(8.0, 10.0),
                    kin_gains=KinGains(t_end=5.0),
                    disturbances=Disturbances(pose_noise_std=0.02))


def meb_scenario(path_name: str = "l_path", controller: str = "PROP",
                 v_ss: float = 6.5, seed: int = 0) -> Scenario:
    """Sloped-lot preset: 10% grade enters as a constant lateral force."""
    return Scenario(name=f"meb_{path_name}_{controller.lower()}",
                    path_name=path_name, controller=controller, seed=seed,
                    speed=SpeedProfile(((0.0, 0.0), (5.0, v_ss))),
                    disturbances=Disturbances(slope_grade=0.10))
