"""Estimate impulse responses by direct simulation and by local projection.

Both estimators run on the same simulated heteroscedastic sample and are
compared with the model-implied response. The direct route iterates the
kernel-inverted one-step map to the horizon; the local-projection route
simulates a single step and applies a kernel regression of y_{t+h-1} on
y_t to the shocked and unshocked step-one states. They coincide exactly
at horizon one and stay close beyond it.

Run from the repository root:
    python demos/irf_two_routes.py       (about half a minute)
"""

from nlirf import Dar1, IrfRequest, irf_direct, irf_lp, simulate, true_irf

model = Dar1.of(rho=0.5, alpha=1.0, beta=0.5)
series = simulate(model, T=5000, y0=0.2, seed=42)
H, S, y0 = 7, 4000, 0.2

for delta in (-1.0, -0.5, 0.5, 1.0):
    req = IrfRequest(y0=y0, horizons=H, delta=delta, S=S, seed=7)
    direct = irf_direct(series, req)
    lp = irf_lp(series, req)
    truth = true_irf(model, y0=y0, h=H, delta=delta, S=100_000, seed=8)

    print(f"\nshock delta = {delta:+.1f}  (conditioning state y0 = {y0})")
    print("  h    true     direct   local-proj")
    for h in range(1, H + 1):
        print(
            f"  {h}  {truth.values[h - 1]:+.4f}  {direct.values[h - 1]:+.4f}"
            f"  {lp.values[h - 1]:+.4f}"
        )

print("\nnote: at h=1 the two estimates agree to the last bit;")
print("the negative-shock curves mirror the positive ones almost exactly,")
print("and doubling delta roughly doubles the response: this DGP is")
print("nonlinear in the state but linear in the shock.")
