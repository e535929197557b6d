"""Module designs, torque-balance checks, structure assembly, and the design matrix.

A module is a quadrotor in a cuboid frame whose four propellers sit in a
square on the frame's xy-plane and may be tilted. Thrust inputs are in
newtons (the thrust coefficient is absorbed into the input), so the drag
torque of each rotor is its thrust times the drag-to-thrust ratio k_m/k_f
in meters.

Structures are rigid grids of modules docked face to face. The assembled
model carries the total mass, the inertia tensor about the center of mass
(each module treated as a homogeneous solid cuboid), and the 6x4n design
matrix mapping rotor thrusts to the body wrench.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import EmptyStructure, InvalidParams, OverlappingModules

# Physical defaults for one module: 135 g per module with a payload margin
# that caps each rotor at 0.645 N; 0.016 m is a typical small-rotor
# drag-to-thrust ratio and is config-overridable.
DEFAULT_MASS = 0.135
DEFAULT_ARM = 0.05
DEFAULT_BODY_SIZE = (0.15, 0.15, 0.06)
DEFAULT_K_F = 1.0
DEFAULT_K_M = 0.016
DEFAULT_F_MAX = 0.645

TORQUE_BALANCE_TOL = 1e-9

# Square rotor layout: arm directions and alternating spin signs. The spin
# sign multiplies the drag torque of each rotor.
_ARM_SIGNS = np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], dtype=float)
_SPIN_SIGNS = (1, -1, 1, -1)


@dataclass(frozen=True, eq=False)
class PropellerSpec:
    """One rotor: position and orientation in the module frame, spin sign."""

    position: np.ndarray
    orientation: np.ndarray
    spin_sign: int

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))
        if abs(self.position[2]) > 1e-12:
            raise InvalidParams("propeller must lie in the module xy-plane")
        if self.spin_sign not in (-1, 1):
            raise InvalidParams(f"spin_sign must be +1 or -1, got {self.spin_sign}")
        if not geometry.is_rotation(self.orientation):
            raise InvalidParams("propeller orientation is not a rotation matrix")

    @property
    def thrust_axis(self):
        return self.orientation @ geometry.E3


@dataclass(frozen=True, eq=False)
class ModuleSpec:
    """One quadrotor module: four propellers plus mass and frame geometry."""

    kind: str
    propellers: tuple
    mass: float = DEFAULT_MASS
    arm: float = DEFAULT_ARM
    body_size: tuple = DEFAULT_BODY_SIZE
    k_f: float = DEFAULT_K_F
    k_m: float = DEFAULT_K_M

    def __post_init__(self):
        object.__setattr__(self, "body_size", tuple(float(d) for d in self.body_size))
        if self.mass <= 0.0 or self.arm <= 0.0:
            raise InvalidParams("mass and arm half-length must be positive")
        if self.k_f <= 0.0 or self.k_m < 0.0:
            raise InvalidParams("k_f must be positive and k_m non-negative")
        if len(self.propellers) != 4:
            raise InvalidParams("a module has exactly four propellers")
        if any(d <= 0.0 for d in self.body_size):
            raise InvalidParams("body dimensions must be positive")
        p = [prop.position for prop in self.propellers]
        if not (np.allclose(p[0], -np.asarray(p[2])) and np.allclose(p[1], -np.asarray(p[3]))):
            raise InvalidParams("propellers must form a square (p1 = -p3, p2 = -p4)")
        if abs(np.linalg.norm(p[0]) - np.linalg.norm(p[1])) > 1e-12:
            raise InvalidParams("propellers must form a square (equal arm radii)")
        if self.kind == "R":
            first = self.propellers[0].orientation
            for prop in self.propellers[1:]:
                if not np.allclose(prop.orientation, first, atol=1e-9):
                    raise InvalidParams("R modules need one shared rotor orientation")
        elif self.kind == "T":
            eta = self._arm_tilt_angle(self.propellers[0])
            for prop, sign in zip(self.propellers, _SPIN_SIGNS):
                axis = prop.position / np.linalg.norm(prop.position)
                expected = geometry.rodrigues(axis, sign * eta)
                if not np.allclose(prop.orientation, expected, atol=1e-9):
                    raise InvalidParams(
                        "T modules need alternating +eta/-eta tilts about the arms"
                    )
        elif self.kind != "custom":
            raise InvalidParams(f"kind must be R, T or custom, got {self.kind!r}")

    @staticmethod
    def _arm_tilt_angle(prop):
        """Signed rotation angle of a propeller about its own arm axis."""
        axis = prop.position / np.linalg.norm(prop.position)
        r = prop.orientation
        cos_a = (np.trace(r) - 1.0) / 2.0
        sin_a = geometry.vee(0.5 * (r - r.T)) @ axis
        return float(np.arctan2(sin_a, np.clip(cos_a, -1.0, 1.0)))

    @property
    def drag_ratio(self):
        """Drag torque per newton of thrust, k_m / k_f, in meters."""
        return self.k_m / self.k_f

    def cuboid_inertia(self):
        """Inertia tensor of the homogeneous solid cuboid about its center."""
        sx, sy, sz = self.body_size
        return (self.mass / 12.0) * np.diag(
            [sy**2 + sz**2, sx**2 + sz**2, sx**2 + sy**2]
        )


@dataclass
class TorqueBalanceReport:
    """Net torque of a module when every rotor produces 1 N."""

    balanced: bool
    residual_torque: np.ndarray
    thrust_magnitude: float
    thrust_direction: np.ndarray
    thrust_torque: np.ndarray = field(repr=False, default=None)
    drag_torque: np.ndarray = field(repr=False, default=None)


def _square_positions(arm):
    return arm * np.hstack([_ARM_SIGNS, np.zeros((4, 1))])


def make_r_module(rstar, mass=DEFAULT_MASS, arm=DEFAULT_ARM,
                  body_size=DEFAULT_BODY_SIZE, k_f=DEFAULT_K_F, k_m=DEFAULT_K_M):
    """Module whose four rotors all share the orientation `rstar`."""
    rstar = np.asarray(rstar, dtype=float)
    if not geometry.is_rotation(rstar):
        raise InvalidParams("rstar is not a rotation matrix")
    props = tuple(
        PropellerSpec(pos, rstar, spin)
        for pos, spin in zip(_square_positions(arm), _SPIN_SIGNS)
    )
    return ModuleSpec("R", props, mass, arm, tuple(body_size), k_f, k_m)


def make_t_module(eta, mass=DEFAULT_MASS, arm=DEFAULT_ARM,
                  body_size=DEFAULT_BODY_SIZE, k_f=DEFAULT_K_F, k_m=DEFAULT_K_M):
    """Module whose rotors are tilted about their own arm axes.

    Diagonally opposite rotors tilt the same way: the tilt angles are
    (+eta, -eta, +eta, -eta) around the unit arm vectors, which cancels
    the net torque while adding yaw authority.
    """
    if abs(eta) >= np.pi / 2:
        raise InvalidParams(f"|eta| must be below pi/2, got {eta}")
    props = []
    for pos, spin in zip(_square_positions(arm), _SPIN_SIGNS):
        axis = pos / np.linalg.norm(pos)
        # tilt alternates with the same +,-,+,- pattern as the spin direction
        props.append(PropellerSpec(pos, geometry.rodrigues(axis, spin * eta), spin))
    return ModuleSpec("T", tuple(props), mass, arm, tuple(body_size), k_f, k_m)


def check_torque_balance(module, tol=TORQUE_BALANCE_TOL):
    """Evaluate the module's net torque with every rotor at 1 N.

    Thrust-induced and drag-induced torques are summed separately; the
    module is balanced only when both vanish within `tol`. Also reports
    the net thrust magnitude and direction at unit inputs.
    """
    thrust_torque = np.zeros(3)
    drag_torque = np.zeros(3)
    total_thrust = np.zeros(3)
    for prop in module.propellers:
        axis = prop.thrust_axis
        thrust_torque += np.cross(prop.position, axis)
        drag_torque += prop.spin_sign * module.drag_ratio * axis
        total_thrust += axis
    magnitude = float(np.linalg.norm(total_thrust))
    direction = total_thrust / magnitude if magnitude > 1e-12 else geometry.E3.copy()
    balanced = (
        np.linalg.norm(thrust_torque) < tol and np.linalg.norm(drag_torque) < tol
    )
    return TorqueBalanceReport(
        balanced=balanced,
        residual_torque=thrust_torque + drag_torque,
        thrust_magnitude=magnitude,
        thrust_direction=direction,
        thrust_torque=thrust_torque,
        drag_torque=drag_torque,
    )


@dataclass(frozen=True, eq=False)
class ModulePlacement:
    """A module at an integer grid cell (row, col, layer) with an optional
    attitude in the structure frame (columns map +x, rows +y, layers +z)."""

    module: ModuleSpec
    cell: tuple
    attitude: np.ndarray = None

    def __post_init__(self):
        if self.attitude is None:
            object.__setattr__(self, "attitude", np.eye(3))
        else:
            att = np.asarray(self.attitude, dtype=float)
            if not geometry.is_rotation(att):
                raise InvalidParams("module attitude is not a rotation matrix")
            object.__setattr__(self, "attitude", att)
        if len(self.cell) != 3:
            raise InvalidParams("grid cell must be (row, col, layer)")


@dataclass(eq=False)
class StructureModel:
    """Rigid assembly of modules, centered on its center of mass.

    `rotor_positions`, `rotor_orientations`, `spin_signs` and `drag_ratios`
    list every propeller in structure coordinates; `design_matrix` is the
    6x4n map from rotor thrusts (N) to the body wrench (N, N.m).
    """

    placements: tuple
    mass: float
    inertia: np.ndarray
    com: np.ndarray
    module_offsets: np.ndarray
    rotor_positions: np.ndarray
    rotor_orientations: np.ndarray
    spin_signs: np.ndarray
    drag_ratios: np.ndarray
    design_matrix: np.ndarray = None
    _inertia_inverse: np.ndarray = field(default=None, repr=False)

    @property
    def n_modules(self):
        return len(self.placements)

    @property
    def n_rotors(self):
        return 4 * len(self.placements)

    @property
    def inertia_inverse(self):
        if self._inertia_inverse is None:
            self._inertia_inverse = np.linalg.inv(self.inertia)
        return self._inertia_inverse

    @property
    def rotor_axes(self):
        """Thrust directions of every rotor, (4n, 3)."""
        return self.rotor_orientations @ geometry.E3


def module_design_matrix(module):
    """6x4 thrust-to-wrench map of a single module about its own center."""
    cols = []
    for prop in module.propellers:
        axis = prop.thrust_axis
        torque = np.cross(prop.position, axis) + prop.spin_sign * module.drag_ratio * axis
        cols.append(np.concatenate([axis, torque]))
    return np.column_stack(cols)


def design_matrix(structure):
    """6x4n thrust-to-wrench map of a structure about its center of mass."""
    axes = structure.rotor_axes
    torque = (
        np.cross(structure.rotor_positions, axes)
        + (structure.spin_signs * structure.drag_ratios)[:, None] * axes
    )
    return np.vstack([axes.T, torque.T])


def assemble_structure(placements):
    """Build a StructureModel from module placements on the docking grid.

    Grid spacing equals the module edge length, so cells are adjacent
    cuboids docked face to face. Positions are re-expressed relative to
    the assembly's center of mass and the inertia tensor combines each
    module's cuboid inertia with its parallel-axis term.
    """
    placements = tuple(
        p if isinstance(p, ModulePlacement) else ModulePlacement(*p)
        for p in placements
    )
    if not placements:
        raise EmptyStructure("structure needs at least one module")
    cells = [tuple(int(c) for c in p.cell) for p in placements]
    if len(set(cells)) != len(cells):
        raise OverlappingModules("two modules share a grid cell")

    sizes = {p.module.body_size for p in placements}
    if len(sizes) != 1:
        raise InvalidParams("all modules in a structure must share body dimensions")
    sx, sy, sz = placements[0].module.body_size

    centers = np.array([[c[1] * sx, c[0] * sy, c[2] * sz] for c in cells])
    masses = np.array([p.module.mass for p in placements])
    total_mass = float(masses.sum())
    com = masses @ centers / total_mass
    offsets = centers - com

    inertia = np.zeros((3, 3))
    rotor_positions = []
    rotor_orientations = []
    spin_signs = []
    drag_ratios = []
    for placement, offset in zip(placements, offsets):
        module, att = placement.module, placement.attitude
        d = offset
        inertia += att @ module.cuboid_inertia() @ att.T
        inertia += module.mass * (np.dot(d, d) * np.eye(3) - np.outer(d, d))
        for prop in module.propellers:
            rotor_positions.append(d + att @ prop.position)
            rotor_orientations.append(att @ prop.orientation)
            spin_signs.append(prop.spin_sign)
            drag_ratios.append(module.drag_ratio)

    structure = StructureModel(
        placements=placements,
        mass=total_mass,
        inertia=inertia,
        com=com,
        module_offsets=offsets,
        rotor_positions=np.array(rotor_positions),
        rotor_orientations=np.array(rotor_orientations),
        spin_signs=np.array(spin_signs, dtype=float),
        drag_ratios=np.array(drag_ratios, dtype=float),
    )
    structure.design_matrix = design_matrix(structure)
    return structure
