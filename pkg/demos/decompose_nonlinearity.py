"""Split an estimated impulse response by nonlinearity degree.

Regressing simulated horizon-h outcomes on Hermite polynomials of the
step-one innovation separates the response to a shock of size delta into
degree-j contributions beta_j * delta^j. Degree one is the linear effect;
everything above is the nonlinear share.

Run from the repository root:
    python demos/decompose_nonlinearity.py
"""

from nlirf import Dar1, IrfRequest, decompose_direct_irf, irf_direct, simulate

model = Dar1.of(rho=0.5, alpha=1.0, beta=0.5)
series = simulate(model, T=5000, y0=0.2, seed=11)
req = IrfRequest(y0=0.2, horizons=5, delta=0.5, S=6000, seed=12)

decs = decompose_direct_irf(series, req, J=5)
estimated = irf_direct(series, req)

print(f"direct-route decomposition, delta = {req.delta}, degrees up to 5\n")
header = "          " + "".join(f"     h={h}" for h in range(1, 6))
print(header)
for label, pick in (
    ("linear   ", lambda d: d.linear_part),
    ("nonlinear", lambda d: d.nonlinear_part),
    ("total    ", lambda d: d.reconstructed_total),
):
    print(label + "".join(f"  {pick(d):+.4f}" for d in decs))
print("estimated" + "".join(f"  {v:+.4f}" for v in estimated.values[:5]))

print("\nper-degree contributions at h = 1:")
for j, c in zip(decs[0].degrees, decs[0].contributions):
    print(f"  degree {j}: {c:+.6f}")

print("\nthe response is almost entirely linear in the shock even though")
print("the process itself is nonlinear: the conditional variance shifts")
print("with the state, not with the innovation.")
