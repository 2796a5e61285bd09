"""Transfer a dga with a nontrivial triple Massey product to its cohomology.

The dga has generators a, b, c in degree 1 with ab = ∂u and bc = ∂x. On
cohomology every binary product of the classes a, b, c vanishes, but the
transferred ternary operation sends (a, b, c) to ±z. Run with
``python demos/massey_transfer.py``.
"""

from cobarkit.fixtures import massey_fixture
from cobarkit.hoalg import ainfinity_operation, is_quasi_iso
from cobarkit.transfer import homotopy_transfer, verify_cylinder


def show(vec, names):
    if not vec:
        return "0"
    return " + ".join(f"{c}·{names[i]}" for i, c in sorted(vec.items()))


def main():
    fx = massey_fixture(4)
    big, small = fx.algebra.carrier.space.names, fx.small.space.names
    print(f"big complex: {', '.join(big)}")
    print(f"cohomology:  {', '.join(small)}")

    result = homotopy_transfer(fx.algebra, fx.first)
    print("certificates:", ", ".join(f"{r.summary()}" for r in result.certificates))
    print("quasi-isomorphism:", is_quasi_iso(result.morphism))
    print("cylinder check:", verify_cylinder(result.as_cylinder()).ok)

    Q = result.transferred.structure
    a, b, c = fx.triple
    print()
    print(f"m2(a, b) = {show(ainfinity_operation(Q, (a, b)), small)}")
    print(f"m2(b, c) = {show(ainfinity_operation(Q, (b, c)), small)}")
    print(f"m3(a, b, c) = {show(ainfinity_operation(Q, fx.triple), small)}")
    print()
    print("The binary products vanish on cohomology, so the only trace of the")
    print("relations ab = ∂u and bc = ∂x is the ternary operation.")


if __name__ == "__main__":
    main()
