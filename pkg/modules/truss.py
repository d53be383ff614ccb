"""
Linear-elastic 2D truss solver (direct stiffness method) and the
23-bar Warren truss benchmark.

Warren truss: bottom chord of 6 bays x 4 m (24 m span), height 2 m,
7 bottom nodes, 6 top nodes, pin at the left support and roller at the
right one, loads P1..P6 acting downward at the top nodes. The response
is the downward deflection of the midspan bottom node.
"""

import logging
from typing import Dict, Sequence, Tuple

import numpy as np
from pydantic import field_validator, model_validator
from scipy import linalg

from modules.models import ArrayModel

logger = logging.getLogger(__name__)

SOLVE_CHUNK = 10_000


class TrussModel(ArrayModel):
    """Pin-jointed plane truss: geometry, connectivity, groups and supports"""
    nodes: np.ndarray                         # (n_nodes, 2) coordinates [m]
    elements: np.ndarray                      # (n_elements, 2) node pairs
    groups: np.ndarray                        # (n_elements,) property group per bar
    supports: Dict[int, Tuple[bool, bool]]    # node -> (x fixed, y fixed)

    @field_validator("nodes", mode="before")
    @classmethod
    def as_coordinates(cls, v):
        return np.array(v, dtype=float).reshape(-1, 2)

    @field_validator("elements", mode="before")
    @classmethod
    def as_connectivity(cls, v):
        return np.array(v, dtype=np.int64).reshape(-1, 2)

    @field_validator("groups", mode="before")
    @classmethod
    def as_groups(cls, v):
        return np.array(v, dtype=np.int64).ravel()

    @model_validator(mode="after")
    def check_topology(self):
        if self.groups.shape[0] != self.elements.shape[0]:
            raise ValueError("one property group per element required")
        if self.elements.min() < 0 or self.elements.max() >= self.nodes.shape[0]:
            raise ValueError("element references a node that does not exist")
        if np.any(self.lengths <= 0):
            raise ValueError("zero-length element")
        return self

    @property
    def n_dof(self) -> int:
        return 2 * self.nodes.shape[0]

    @property
    def n_groups(self) -> int:
        return int(self.groups.max()) + 1

    @property
    def lengths(self) -> np.ndarray:
        d = self.nodes[self.elements[:, 1]] - self.nodes[self.elements[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @property
    def free_dofs(self) -> np.ndarray:
        fixed = set()
        for node, (fx, fy) in self.supports.items():
            if fx:
                fixed.add(2 * node)
            if fy:
                fixed.add(2 * node + 1)
        return np.array([d for d in range(self.n_dof) if d not in fixed], dtype=np.int64)

    def unit_stiffness(self) -> np.ndarray:
        """
        (n_elements, n_dof, n_dof) global stiffness of each bar with EA = 1.
        K(EA) = sum_e EA_e * unit[e].
        """
        unit = np.zeros((self.elements.shape[0], self.n_dof, self.n_dof))
        d = self.nodes[self.elements[:, 1]] - self.nodes[self.elements[:, 0]]
        for e, (i, j) in enumerate(self.elements):
            length = self.lengths[e]
            c, s = d[e] / length
            k = np.outer([-c, -s, c, s], [-c, -s, c, s]) / length
            dofs = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
            unit[e][np.ix_(dofs, dofs)] += k
        return unit

    def group_stiffness(self) -> np.ndarray:
        """(n_groups, n_dof, n_dof): unit stiffness summed per property group"""
        unit = self.unit_stiffness()
        return np.stack([unit[self.groups == g].sum(axis=0) for g in range(self.n_groups)])

    def stiffness(self, axial_rigidity: Sequence[float]) -> np.ndarray:
        """Global stiffness for one EA value per element"""
        ea = np.asarray(axial_rigidity, dtype=float)
        if ea.shape != (self.elements.shape[0],):
            raise ValueError(f"need {self.elements.shape[0]} EA values, got {ea.shape}")
        return np.einsum("e,eij->ij", ea, self.unit_stiffness())

    def solve(self, axial_rigidity: Sequence[float], loads: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Nodal displacements and support reactions for one load case.
        loads is an (n_dof,) vector of nodal forces.
        """
        ea = np.asarray(axial_rigidity, dtype=float)
        if np.any(ea <= 0):
            raise ValueError("axial rigidities must be strictly positive")
        K = self.stiffness(ea)
        F = np.asarray(loads, dtype=float)
        free = self.free_dofs
        U = np.zeros(self.n_dof)
        try:
            factor = linalg.cho_factor(K[np.ix_(free, free)], lower=True)
        except linalg.LinAlgError:
            raise ValueError("stiffness matrix is singular: truss is a mechanism")
        U[free] = linalg.cho_solve(factor, F[free])
        reactions = K @ U - F
        return U, reactions


# ============= WARREN TRUSS BENCHMARK =============

BAY = 4.0
HEIGHT = 2.0
N_BAYS = 6
MIDSPAN_NODE = 3
HORIZONTAL, DIAGONAL = 0, 1


def warren_truss() -> TrussModel:
    bottom = [(BAY * i, 0.0) for i in range(N_BAYS + 1)]
    top = [(BAY * i + BAY / 2, HEIGHT) for i in range(N_BAYS)]
    nodes = bottom + top
    first_top = N_BAYS + 1

    elements, groups = [], []
    for i in range(N_BAYS):
        elements.append((i, i + 1))
        groups.append(HORIZONTAL)
    for i in range(N_BAYS - 1):
        elements.append((first_top + i, first_top + i + 1))
        groups.append(HORIZONTAL)
    for i in range(N_BAYS):
        elements.append((i, first_top + i))
        elements.append((first_top + i, i + 1))
        groups.extend([DIAGONAL, DIAGONAL])

    return TrussModel(
        nodes=nodes,
        elements=elements,
        groups=groups,
        supports={0: (True, True), N_BAYS: (False, True)},
    )


_WARREN = warren_truss()
_GROUP_K = _WARREN.group_stiffness()[:, _WARREN.free_dofs][:, :, _WARREN.free_dofs]
_FREE = _WARREN.free_dofs
_LOAD_DOFS = np.array([int(np.flatnonzero(_FREE == 2 * (N_BAYS + 1 + i) + 1)[0]) for i in range(N_BAYS)])
_MIDSPAN_DOF = int(np.flatnonzero(_FREE == 2 * MIDSPAN_NODE + 1)[0])


def truss_displacement(x) -> np.ndarray:
    """
    Midspan deflection [m, positive downward] for inputs
    [A1, A2, E1, E2, P1..P6]: horizontal-bar area and modulus, diagonal-bar
    area and modulus, top-node loads [N]. Accepts one point or an N x 10 batch.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != 10:
        raise ValueError(f"truss inputs have 10 components, got {X.shape[1]}")
    if np.any(X[:, :4] <= 0):
        raise ValueError("cross-sections and moduli must be strictly positive")

    out = np.empty(X.shape[0])
    n_free = _FREE.shape[0]
    for start in range(0, X.shape[0], SOLVE_CHUNK):
        batch = X[start:start + SOLVE_CHUNK]
        ea_h = batch[:, 0] * batch[:, 2]
        ea_d = batch[:, 1] * batch[:, 3]
        K = ea_h[:, None, None] * _GROUP_K[HORIZONTAL] + ea_d[:, None, None] * _GROUP_K[DIAGONAL]
        F = np.zeros((batch.shape[0], n_free))
        F[:, _LOAD_DOFS] = -batch[:, 4:]
        U = np.linalg.solve(K, F[:, :, None])[:, :, 0]
        out[start:start + SOLVE_CHUNK] = -U[:, _MIDSPAN_DOF]
    return out
