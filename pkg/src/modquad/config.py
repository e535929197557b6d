"""Config ingestion: one canonical YAML schema for structures and scenarios.

Keys carry their units (``eta_rad``, ``mass_kg``); unknown keys are
rejected with their location so typos in scientific configs surface
immediately. A config describes the module grid, physical defaults,
controller gains, and optionally one scenario (trajectory plus timing).
"""

from dataclasses import dataclass, field

import numpy as np
import yaml

from . import geometry, trajectories, vehicle
from .control import ControllerGains
from .errors import InvalidParams, ParseError, SchemaError
from .trajectories import (
    AttitudeSineDef,
    HelixDef,
    HoverDef,
    QuinticChainDef,
    RectangleDef,
    Waypoint,
)


class _LocatedDict(dict):
    """Mapping that remembers the line it started on."""

    line = None


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_located_mapping(loader, node):
    data = _LocatedDict()
    data.line = node.start_mark.line + 1
    yield data
    data.update(loader.construct_mapping(node, deep=True))


_LineLoader.add_constructor("tag:yaml.org,2002:map", _construct_located_mapping)


@dataclass
class ModuleEntry:
    kind: str
    cell: tuple
    yaw_rad: float = 0.0
    tilt_axis: tuple = None
    tilt_angle_rad: float = 0.0
    eta_rad: float = 0.0
    propellers: tuple = None


@dataclass
class PhysicalParams:
    module_mass_kg: float = vehicle.DEFAULT_MASS
    arm_m: float = vehicle.DEFAULT_ARM
    body_size_m: tuple = vehicle.DEFAULT_BODY_SIZE
    drag_to_thrust_m: float = vehicle.DEFAULT_K_M
    f_max_n: float = vehicle.DEFAULT_F_MAX


@dataclass
class ScenarioParams:
    trajectory: object
    duration_s: float = 30.0
    dt_ctrl_s: float = 0.002
    dt_sim_s: float = 0.001
    skip_s: float = 5.0


@dataclass
class StructureConfig:
    modules: tuple
    physical: PhysicalParams = field(default_factory=PhysicalParams)
    gains: ControllerGains = field(default_factory=ControllerGains)
    scenario: ScenarioParams = None


class _Validator:
    def __init__(self):
        self.problems = []

    def fail(self, path, message, node=None):
        where = f" (line {node.line})" if isinstance(node, _LocatedDict) else ""
        self.problems.append(f"{path}{where}: {message}")

    def check_keys(self, node, path, allowed):
        for key in node:
            if key not in allowed:
                self.fail(path, f"unknown key {key!r}", node)

    def number(self, node, path, key, default=None, positive=False):
        if key not in node:
            if default is None:
                self.fail(path, f"missing key {key!r}", node)
                return 0.0
            return default
        value = node[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            self.fail(path, f"{key} must be a number", node)
            return 0.0
        if positive and value <= 0:
            self.fail(path, f"{key} must be positive", node)
        return float(value)

    def vector(self, node, path, key, size, default=None):
        if key not in node:
            if default is None:
                self.fail(path, f"missing key {key!r}", node)
                return (0.0,) * size
            return default
        value = node[key]
        if (not isinstance(value, (list, tuple)) or len(value) != size
                or any(isinstance(v, bool) or not isinstance(v, (int, float))
                       for v in value)):
            self.fail(path, f"{key} must be a list of {size} numbers", node)
            return (0.0,) * size
        return tuple(float(v) for v in value)

    def mapping(self, value, path):
        if not isinstance(value, dict):
            self.fail(path, "must be a mapping")
            return _LocatedDict()
        return value


_MODULE_KEYS = {"kind", "cell", "yaw_rad", "tilt_axis", "tilt_angle_rad",
                "eta_rad", "propellers"}
_PROP_KEYS = {"tilt_axis", "tilt_angle_rad", "spin"}
_PHYSICAL_KEYS = {"module_mass_kg", "arm_m", "body_size_m",
                  "drag_to_thrust_m", "f_max_n"}
_GAIN_KEYS = {"k_pos", "k_vel", "k_att", "k_omega", "k_int", "integral_limit"}
_SCENARIO_KEYS = {"trajectory", "duration_s", "dt_ctrl_s", "dt_sim_s", "skip_s"}
_TRAJECTORY_KEYS = {
    "helix": {"kind", "center_m", "radius_m", "z_min_m", "z_max_m",
              "z_period_s", "xy_period_s", "yaw_period_s"},
    "rectangle": {"kind", "length_m", "width_m", "height_m", "lap_time_s",
                  "pitch_hold_rad", "yaw_hold_rad"},
    "attitude_sine": {"kind", "axis", "amplitude_rad", "period_s",
                      "hover_point_m"},
    "quintic_chain": {"kind", "waypoints", "durations_s"},
    "hover": {"kind", "point_m", "yaw_rad", "pitch_rad"},
}


def _parse_module(node, path, v):
    node = v.mapping(node, path)
    v.check_keys(node, path, _MODULE_KEYS)
    kind = node.get("kind")
    if kind not in ("R", "T", "custom"):
        v.fail(path, f"kind must be R, T or custom, got {kind!r}", node)
        kind = "R"
    cell = v.vector(node, path, "cell", 3)
    entry = ModuleEntry(
        kind=kind,
        cell=tuple(int(c) for c in cell),
        yaw_rad=v.number(node, path, "yaw_rad", default=0.0),
    )
    if kind == "R":
        entry.tilt_axis = v.vector(node, path, "tilt_axis", 3, default=(0.0, 0.0, 1.0))
        if np.linalg.norm(entry.tilt_axis) == 0.0:
            v.fail(path, "tilt_axis must be a non-zero vector", node)
            entry.tilt_axis = (0.0, 0.0, 1.0)
        entry.tilt_angle_rad = v.number(node, path, "tilt_angle_rad", default=0.0)
        for key in ("eta_rad", "propellers"):
            if key in node:
                v.fail(path, f"{key} is not valid for an R module", node)
    elif kind == "T":
        entry.eta_rad = v.number(node, path, "eta_rad", default=0.0)
        if abs(entry.eta_rad) >= np.pi / 2:
            v.fail(path, "eta_rad magnitude must be below pi/2", node)
        for key in ("tilt_axis", "tilt_angle_rad", "propellers"):
            if key in node:
                v.fail(path, f"{key} is not valid for a T module", node)
    else:
        props = node.get("propellers")
        if not isinstance(props, list) or len(props) != 4:
            v.fail(path, "custom modules need exactly four propellers", node)
            props = []
        parsed = []
        for i, prop in enumerate(props):
            ppath = f"{path}.propellers[{i}]"
            prop = v.mapping(prop, ppath)
            v.check_keys(prop, ppath, _PROP_KEYS)
            axis = v.vector(prop, ppath, "tilt_axis", 3, default=(0.0, 0.0, 1.0))
            if np.linalg.norm(axis) == 0.0:
                v.fail(ppath, "tilt_axis must be a non-zero vector", prop)
                axis = (0.0, 0.0, 1.0)
            angle = v.number(prop, ppath, "tilt_angle_rad", default=0.0)
            spin = prop.get("spin", 1)
            if spin not in (-1, 1):
                v.fail(ppath, "spin must be +1 or -1", prop)
                spin = 1
            parsed.append((axis, angle, int(spin)))
        entry.propellers = tuple(parsed)
    return entry


def _parse_trajectory(node, path, v):
    node = v.mapping(node, path)
    kind = node.get("kind")
    if kind not in _TRAJECTORY_KEYS:
        v.fail(path, f"unknown trajectory kind {kind!r}", node)
        return None
    v.check_keys(node, path, _TRAJECTORY_KEYS[kind])
    if kind == "helix":
        return HelixDef(
            center=v.vector(node, path, "center_m", 2, default=(-0.5, 0.0)),
            radius=v.number(node, path, "radius_m", default=0.45, positive=True),
            z_min=v.number(node, path, "z_min_m", default=0.45),
            z_max=v.number(node, path, "z_max_m", default=0.95),
            z_period=v.number(node, path, "z_period_s", default=14.0, positive=True),
            xy_period=v.number(node, path, "xy_period_s", default=14.0, positive=True),
            yaw_period=v.number(node, path, "yaw_period_s", default=18.0, positive=True),
        )
    if kind == "rectangle":
        return RectangleDef(
            length=v.number(node, path, "length_m", default=0.8, positive=True),
            width=v.number(node, path, "width_m", default=0.6, positive=True),
            height=v.number(node, path, "height_m", default=0.5),
            lap_time=v.number(node, path, "lap_time_s", default=24.0, positive=True),
            pitch_hold=v.number(node, path, "pitch_hold_rad", default=0.0),
            yaw_hold=v.number(node, path, "yaw_hold_rad", default=0.0),
        )
    if kind == "attitude_sine":
        axis = node.get("axis", "y")
        if axis not in ("x", "y", "z"):
            v.fail(path, f"axis must be x, y or z, got {axis!r}", node)
            axis = "y"
        return AttitudeSineDef(
            axis=axis,
            amplitude=v.number(node, path, "amplitude_rad", default=np.radians(20.0)),
            period=v.number(node, path, "period_s", default=90.0, positive=True),
            hover_point=v.vector(node, path, "hover_point_m", 3,
                                 default=(0.0, 0.0, 0.5)),
        )
    if kind == "quintic_chain":
        raw_wps = node.get("waypoints")
        if not isinstance(raw_wps, list) or len(raw_wps) < 2:
            v.fail(path, "waypoints must list at least two entries", node)
            return None
        waypoints = []
        for i, wp in enumerate(raw_wps):
            wpath = f"{path}.waypoints[{i}]"
            wp = v.mapping(wp, wpath)
            v.check_keys(wp, wpath, {"position_m", "rotation_rad"})
            waypoints.append(Waypoint(
                position=v.vector(wp, wpath, "position_m", 3),
                rotation=v.vector(wp, wpath, "rotation_rad", 3,
                                  default=(0.0, 0.0, 0.0)),
            ))
        durations = node.get("durations_s")
        if (not isinstance(durations, list)
                or len(durations) != len(waypoints) - 1
                or any(not isinstance(d, (int, float)) or d <= 0 for d in durations)):
            v.fail(path, "durations_s must hold one positive number per segment",
                   node)
            return None
        try:
            return QuinticChainDef(waypoints=tuple(waypoints),
                                   durations=tuple(float(d) for d in durations))
        except InvalidParams as exc:
            v.fail(path, str(exc), node)
            return None
    return HoverDef(
        point=v.vector(node, path, "point_m", 3, default=(0.0, 0.0, 0.5)),
        yaw=v.number(node, path, "yaw_rad", default=0.0),
        pitch=v.number(node, path, "pitch_rad", default=0.0),
    )


def parse_config(text):
    """Parse and validate a config document.

    Raises ParseError on YAML syntax problems and SchemaError carrying
    every schema violation found (with line numbers where available).
    """
    try:
        root = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from exc
    if root is None:
        raise SchemaError(["document is empty"])
    v = _Validator()
    root = v.mapping(root, "$")
    v.check_keys(root, "$", {"modules", "physical", "gains", "scenario"})

    raw_modules = root.get("modules")
    modules = []
    if not isinstance(raw_modules, list) or not raw_modules:
        v.fail("$", "modules must list at least one module")
    else:
        for i, node in enumerate(raw_modules):
            modules.append(_parse_module(node, f"modules[{i}]", v))
        cells = [m.cell for m in modules]
        if len(set(cells)) != len(cells):
            v.fail("$", "two modules share a grid cell")

    physical = PhysicalParams()
    if "physical" in root:
        node = v.mapping(root["physical"], "physical")
        v.check_keys(node, "physical", _PHYSICAL_KEYS)
        physical = PhysicalParams(
            module_mass_kg=v.number(node, "physical", "module_mass_kg",
                                    default=vehicle.DEFAULT_MASS, positive=True),
            arm_m=v.number(node, "physical", "arm_m",
                           default=vehicle.DEFAULT_ARM, positive=True),
            body_size_m=v.vector(node, "physical", "body_size_m", 3,
                                 default=vehicle.DEFAULT_BODY_SIZE),
            drag_to_thrust_m=v.number(node, "physical", "drag_to_thrust_m",
                                      default=vehicle.DEFAULT_K_M),
            f_max_n=v.number(node, "physical", "f_max_n",
                             default=vehicle.DEFAULT_F_MAX, positive=True),
        )

    gains = ControllerGains()
    if "gains" in root:
        node = v.mapping(root["gains"], "gains")
        v.check_keys(node, "gains", _GAIN_KEYS)
        try:
            gains = ControllerGains(
                k_pos=v.vector(node, "gains", "k_pos", 3, default=(6.0,) * 3),
                k_vel=v.vector(node, "gains", "k_vel", 3, default=(4.0,) * 3),
                k_att=v.vector(node, "gains", "k_att", 3, default=(10.0,) * 3),
                k_omega=v.vector(node, "gains", "k_omega", 3, default=(2.0,) * 3),
                k_int=v.vector(node, "gains", "k_int", 3, default=(0.0,) * 3),
                integral_limit=v.number(node, "gains", "integral_limit",
                                        default=2.0, positive=True),
            )
        except InvalidParams as exc:
            v.fail("gains", str(exc), node)

    scenario = None
    if "scenario" in root:
        node = v.mapping(root["scenario"], "scenario")
        v.check_keys(node, "scenario", _SCENARIO_KEYS)
        if "trajectory" not in node:
            v.fail("scenario", "missing key 'trajectory'", node)
        else:
            traj = _parse_trajectory(node["trajectory"], "scenario.trajectory", v)
            duration = v.number(node, "scenario", "duration_s", default=30.0)
            if duration < 0:
                v.fail("scenario", "duration_s must be non-negative", node)
            scenario = ScenarioParams(
                trajectory=traj,
                duration_s=duration,
                dt_ctrl_s=v.number(node, "scenario", "dt_ctrl_s",
                                   default=0.002, positive=True),
                dt_sim_s=v.number(node, "scenario", "dt_sim_s",
                                  default=0.001, positive=True),
                skip_s=v.number(node, "scenario", "skip_s", default=5.0),
            )

    if v.problems:
        raise SchemaError(v.problems)
    return StructureConfig(modules=tuple(modules), physical=physical,
                           gains=gains, scenario=scenario)


def load_config(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def _unit_axis(axis):
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        raise SchemaError(["tilt_axis must be a non-zero vector"])
    return axis / norm


def build_module(entry, physical):
    """ModuleSpec for one config entry."""
    kwargs = dict(
        mass=physical.module_mass_kg,
        arm=physical.arm_m,
        body_size=tuple(physical.body_size_m),
        k_f=1.0,
        k_m=physical.drag_to_thrust_m,
    )
    if entry.kind == "R":
        rstar = geometry.rodrigues(_unit_axis(entry.tilt_axis), entry.tilt_angle_rad)
        return vehicle.make_r_module(rstar, **kwargs)
    if entry.kind == "T":
        return vehicle.make_t_module(entry.eta_rad, **kwargs)
    positions = physical.arm_m * np.array(
        [[1, 1, 0], [1, -1, 0], [-1, -1, 0], [-1, 1, 0]], dtype=float
    )
    props = tuple(
        vehicle.PropellerSpec(
            pos, geometry.rodrigues(_unit_axis(axis), angle), spin
        )
        for pos, (axis, angle, spin) in zip(positions, entry.propellers)
    )
    return vehicle.ModuleSpec("custom", props, **kwargs)


def build_structure(config):
    """Assemble the StructureModel a config describes."""
    placements = []
    for entry in config.modules:
        module = build_module(entry, config.physical)
        attitude = geometry.rot_principal("z", entry.yaw_rad)
        placements.append(vehicle.ModulePlacement(module, entry.cell, attitude))
    return vehicle.assemble_structure(placements)


def build_trajectory(config, dof):
    """Callable t -> Setpoint for the config's scenario."""
    if config.scenario is None or config.scenario.trajectory is None:
        raise SchemaError(["config has no scenario"])
    return trajectories.make_trajectory(config.scenario.trajectory, dof)


def _module_to_dict(entry):
    out = {"kind": entry.kind, "cell": list(entry.cell)}
    if entry.yaw_rad:
        out["yaw_rad"] = entry.yaw_rad
    if entry.kind == "R":
        out["tilt_axis"] = list(entry.tilt_axis)
        out["tilt_angle_rad"] = entry.tilt_angle_rad
    elif entry.kind == "T":
        out["eta_rad"] = entry.eta_rad
    else:
        out["propellers"] = [
            {"tilt_axis": list(axis), "tilt_angle_rad": angle, "spin": spin}
            for axis, angle, spin in entry.propellers
        ]
    return out


def _trajectory_to_dict(defn):
    if defn.kind == "helix":
        return {"kind": "helix", "center_m": list(defn.center),
                "radius_m": defn.radius, "z_min_m": defn.z_min,
                "z_max_m": defn.z_max, "z_period_s": defn.z_period,
                "xy_period_s": defn.xy_period, "yaw_period_s": defn.yaw_period}
    if defn.kind == "rectangle":
        return {"kind": "rectangle", "length_m": defn.length,
                "width_m": defn.width, "height_m": defn.height,
                "lap_time_s": defn.lap_time, "pitch_hold_rad": defn.pitch_hold,
                "yaw_hold_rad": defn.yaw_hold}
    if defn.kind == "attitude_sine":
        return {"kind": "attitude_sine", "axis": defn.axis,
                "amplitude_rad": defn.amplitude, "period_s": defn.period,
                "hover_point_m": list(defn.hover_point)}
    if defn.kind == "quintic_chain":
        return {"kind": "quintic_chain",
                "waypoints": [{"position_m": list(wp.position),
                               "rotation_rad": list(wp.rotation)}
                              for wp in defn.waypoints],
                "durations_s": list(defn.durations)}
    return {"kind": "hover", "point_m": list(defn.point),
            "yaw_rad": defn.yaw, "pitch_rad": defn.pitch}


def render_config(config):
    """Canonical YAML text that parses back to an equal config."""
    doc = {
        "modules": [_module_to_dict(m) for m in config.modules],
        "physical": {
            "module_mass_kg": config.physical.module_mass_kg,
            "arm_m": config.physical.arm_m,
            "body_size_m": list(config.physical.body_size_m),
            "drag_to_thrust_m": config.physical.drag_to_thrust_m,
            "f_max_n": config.physical.f_max_n,
        },
        "gains": {
            "k_pos": [float(g) for g in config.gains.k_pos],
            "k_vel": [float(g) for g in config.gains.k_vel],
            "k_att": [float(g) for g in config.gains.k_att],
            "k_omega": [float(g) for g in config.gains.k_omega],
            "k_int": [float(g) for g in config.gains.k_int],
            "integral_limit": config.gains.integral_limit,
        },
    }
    if config.scenario is not None:
        doc["scenario"] = {
            "trajectory": _trajectory_to_dict(config.scenario.trajectory),
            "duration_s": config.scenario.duration_s,
            "dt_ctrl_s": config.scenario.dt_ctrl_s,
            "dt_sim_s": config.scenario.dt_sim_s,
            "skip_s": config.scenario.skip_s,
        }
    return yaml.dump(doc, sort_keys=False, default_flow_style=None,
                     Dumper=_ReprDumper)


class _ReprDumper(yaml.SafeDumper):
    """Dump floats with repr so render/parse round trips exactly."""


_ReprDumper.add_representer(
    float,
    lambda dumper, value: dumper.represent_scalar(
        "tag:yaml.org,2002:float", repr(float(value))
    ),
)
