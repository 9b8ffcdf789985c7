"""Butcher tableaux for explicit and implicit-explicit Runge-Kutta methods.

Each method is stored as a pair of tableaux sharing the quadrature
weights b: an explicit tableau applied to the non-stiff part and a
diagonally implicit tableau applied to the stiff part.  Purely explicit
methods set the implicit tableau to zero, so a single stepping routine
covers both families.

Every registered tableau is checked at load time: row sums must equal
the abscissae and the classical order conditions up to order three must
hold, which protects against transcription slips in the long
coefficient lists below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ImexTableau:
    name: str
    order: int
    a_implicit: np.ndarray
    a_explicit: np.ndarray
    b: np.ndarray
    b_explicit: np.ndarray

    @property
    def stages(self) -> int:
        return self.b.size

    @property
    def c_implicit(self) -> np.ndarray:
        return self.a_implicit.sum(axis=1)

    @property
    def c_explicit(self) -> np.ndarray:
        return self.a_explicit.sum(axis=1)

    @property
    def is_explicit(self) -> bool:
        return not np.any(self.a_implicit) and not np.any(self.b != self.b_explicit)

    @property
    def stiffly_accurate(self) -> bool:
        return bool(
            np.array_equal(self.a_implicit[-1], self.b)
            and np.array_equal(self.a_explicit[-1], self.b_explicit)
        )


class TableauError(ValueError):
    pass


def _check_order_conditions(tab: ImexTableau):
    tol = 1e-13
    purely_explicit = not np.any(tab.a_implicit)
    parts = [("explicit", tab.a_explicit, tab.b_explicit)]
    if not purely_explicit:
        parts.append(("implicit", tab.a_implicit, tab.b))
    for label, a, b in parts:
        c = a.sum(axis=1)
        if abs(b.sum() - 1.0) > tol:
            raise TableauError(f"{tab.name}: {label} weights do not sum to 1")
        if tab.order >= 2 and abs(b @ c - 0.5) > tol:
            raise TableauError(f"{tab.name}: {label} order-2 condition failed")
        if tab.order >= 3:
            if abs(b @ c**2 - 1.0 / 3.0) > tol:
                raise TableauError(f"{tab.name}: {label} order-3 condition b c^2 failed")
        # Mixed third-order condition couples the two tableaux.
    if tab.order >= 3 and not purely_explicit:
        for a in (tab.a_implicit, tab.a_explicit):
            for bw, c in ((tab.b, tab.c_implicit), (tab.b_explicit, tab.c_explicit)):
                if abs(bw @ (a @ c) - 1.0 / 6.0) > 1e-12:
                    raise TableauError(f"{tab.name}: coupled order-3 condition failed")
    # Implicit abscissae must match the explicit ones for an additive method.
    if not purely_explicit and np.max(np.abs(tab.c_implicit - tab.c_explicit)) > 1e-13:
        raise TableauError(f"{tab.name}: tableau abscissae disagree")


def _tableau(name, order, a_implicit, a_explicit, b, b_explicit=None) -> ImexTableau:
    a_implicit = np.array(a_implicit, dtype=float)
    a_explicit = np.array(a_explicit, dtype=float)
    b = np.array(b, dtype=float)
    b_explicit = b.copy() if b_explicit is None else np.array(b_explicit, dtype=float)
    tab = ImexTableau(name, order, a_implicit, a_explicit, b, b_explicit)
    _check_order_conditions(tab)
    return tab


def _classical_rk4() -> ImexTableau:
    a = np.zeros((4, 4))
    a[1, 0] = 0.5
    a[2, 1] = 0.5
    a[3, 2] = 1.0
    b = np.array([1.0, 2.0, 2.0, 1.0]) / 6.0
    return _tableau("rk4", 4, np.zeros((4, 4)), a, b)


def _ars343() -> ImexTableau:
    """Third-order, four-implicit-stage additive scheme of Ascher,
    Ruuth and Spiteri (the ARS(4,4,3) pair)."""
    gamma = 0.5
    a_im = np.zeros((5, 5))
    a_im[1, 1] = gamma
    a_im[2, 1:3] = [1.0 / 6.0, gamma]
    a_im[3, 1:4] = [-0.5, 0.5, gamma]
    a_im[4, 1:5] = [1.5, -1.5, 0.5, gamma]
    a_ex = np.zeros((5, 5))
    a_ex[1, 0] = 0.5
    a_ex[2, 0:2] = [11.0 / 18.0, 1.0 / 18.0]
    a_ex[3, 0:3] = [5.0 / 6.0, -5.0 / 6.0, 0.5]
    a_ex[4, 0:4] = [0.25, 1.75, 0.75, -1.75]
    b = a_im[4].copy()
    b_ex = np.array([0.25, 1.75, 0.75, -1.75, 0.0])
    return _tableau("ars343", 3, a_im, a_ex, b, b_ex)


def _kc43() -> ImexTableau:
    """Six-stage, fourth-order additive pair of Kennedy and Carpenter
    (ARK4(3)6L[2]SA) with an L-stable stiffly accurate implicit part."""
    a_im = np.zeros((6, 6))
    a_im[1, :2] = [0.25, 0.25]
    a_im[2, :3] = [8611.0 / 62500.0, -1743.0 / 31250.0, 0.25]
    a_im[3, :4] = [
        5012029.0 / 34652500.0,
        -654441.0 / 2922500.0,
        174375.0 / 388108.0,
        0.25,
    ]
    a_im[4, :5] = [
        15267082809.0 / 155376265600.0,
        -71443401.0 / 120774400.0,
        730878875.0 / 902184768.0,
        2285395.0 / 8070912.0,
        0.25,
    ]
    a_im[5, :] = [
        82889.0 / 524892.0,
        0.0,
        15625.0 / 83664.0,
        69875.0 / 102672.0,
        -2260.0 / 8211.0,
        0.25,
    ]
    a_ex = np.zeros((6, 6))
    a_ex[1, 0] = 0.5
    a_ex[2, :2] = [13861.0 / 62500.0, 6889.0 / 62500.0]
    a_ex[3, :3] = [
        -116923316275.0 / 2393684061468.0,
        -2731218467317.0 / 15368042101831.0,
        9408046702089.0 / 11113171139209.0,
    ]
    a_ex[4, :4] = [
        -451086348788.0 / 2902428689909.0,
        -2682348792572.0 / 7519795681897.0,
        12662868775082.0 / 11960479115383.0,
        3355817975965.0 / 11060851509271.0,
    ]
    a_ex[5, :5] = [
        647845179188.0 / 3216320057751.0,
        73281519250.0 / 8382639484533.0,
        552539513391.0 / 3454668386233.0,
        3354512671639.0 / 8306763924573.0,
        4040.0 / 17871.0,
    ]
    b = a_im[5].copy()
    return _tableau("kc43", 4, a_im, a_ex, b)


def _kc54() -> ImexTableau:
    """Eight-stage, fifth-order additive pair of Kennedy and Carpenter
    (ARK5(4)8L[2]SA)."""
    a_im = np.zeros((8, 8))
    a_im[1, :2] = [41.0 / 200.0, 41.0 / 200.0]
    a_im[2, :3] = [41.0 / 400.0, -567603406766.0 / 11931857230679.0, 41.0 / 200.0]
    a_im[3, :4] = [
        683785636431.0 / 9252920307686.0,
        0.0,
        -110385047103.0 / 1367015193373.0,
        41.0 / 200.0,
    ]
    a_im[4, :5] = [
        3016520224154.0 / 10081342136671.0,
        0.0,
        30586259806659.0 / 12414158314087.0,
        -22760509404356.0 / 11113319521817.0,
        41.0 / 200.0,
    ]
    a_im[5, :6] = [
        218866479029.0 / 1489978393911.0,
        0.0,
        638256894668.0 / 5436446318841.0,
        -1179710474555.0 / 5321154724896.0,
        -60928119172.0 / 8023461067671.0,
        41.0 / 200.0,
    ]
    a_im[6, :7] = [
        1020004230633.0 / 5715676835656.0,
        0.0,
        25762820946817.0 / 25263940353407.0,
        -2161375909145.0 / 9755907335909.0,
        -211217309593.0 / 5846859502534.0,
        -4269925059573.0 / 7827059040749.0,
        41.0 / 200.0,
    ]
    a_im[7, :] = [
        -872700587467.0 / 9133579230613.0,
        0.0,
        0.0,
        22348218063261.0 / 9555858737531.0,
        -1143369518992.0 / 8141816002931.0,
        -39379526789629.0 / 19018526304540.0,
        32727382324388.0 / 42900044865799.0,
        41.0 / 200.0,
    ]
    a_ex = np.zeros((8, 8))
    a_ex[1, 0] = 41.0 / 100.0
    a_ex[2, :2] = [367902744464.0 / 2072280473677.0, 677623207551.0 / 8224143866563.0]
    a_ex[3, :3] = [1268023523408.0 / 10340822734521.0, 0.0, 1029933939417.0 / 13636558850479.0]
    a_ex[4, :4] = [
        14463281900351.0 / 6315353703477.0,
        0.0,
        66114435211212.0 / 5879490589093.0,
        -54053170152839.0 / 4284798021562.0,
    ]
    a_ex[5, :5] = [
        14090043504691.0 / 34967701212078.0,
        0.0,
        15191511035443.0 / 11219624916014.0,
        -18461159152457.0 / 12425892160975.0,
        -281667163811.0 / 9011619295870.0,
    ]
    a_ex[6, :6] = [
        19230459214898.0 / 13134317526959.0,
        0.0,
        21275331358303.0 / 2942455364971.0,
        -38145345988419.0 / 4862620318723.0,
        -1.0 / 8.0,
        -1.0 / 8.0,
    ]
    a_ex[7, :7] = [
        -19977161125411.0 / 11928030595625.0,
        0.0,
        -40795976796054.0 / 6384907823539.0,
        177454434618887.0 / 12078138498510.0,
        782672205425.0 / 8267701900261.0,
        -69563011059811.0 / 9646580694205.0,
        7356628210526.0 / 4942186776405.0,
    ]
    b = a_im[7].copy()
    return _tableau("kc54", 5, a_im, a_ex, b)


_REGISTRY = {
    "rk4": _classical_rk4,
    "ars343": _ars343,
    "kc43": _kc43,
    "kc54": _kc54,
}


def available_tableaux() -> list[str]:
    return sorted(_REGISTRY)


def get_tableau(name: str) -> ImexTableau:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise TableauError(
            f"unknown tableau {name!r}; available: {', '.join(available_tableaux())}"
        ) from None
    return factory()
