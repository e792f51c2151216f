"""Nonparametric regression rates of the 2D TV denoiser, empirically.

Three function classes, three predicted behaviors:
  * Holder-smooth (alpha = 1): MSE ~ n^(-1/2) up to logs,
  * piecewise constant with a 1D boundary: MSE ~ n^(-1/2) up to logs,
  * bi-isotonic with fixed corner-to-corner variation: MSE shrinking in n.
Reduced to 5 trials per point; the holder-2d / cartoon-2d / isotonic-2d
CLI presets run the full versions.
"""
from graphtv import experiments as E

for kind, sides in (("holder", [16, 32, 64, 128]),
                    ("pc", [16, 32, 64, 128]),
                    ("cartoon", [16, 32, 64, 128])):
    records, fit = E.rate_study_nonparametric(kind, sides=sides, trials=5,
                                              master_seed=513)
    means = E.mean_mse_by(records)
    print(f"{kind:10s} mean MSE by n: "
          f"{ {n: round(m, 4) for n, m in means.items()} }")
    print(f"{'':10s} power-law exponent {fit.params['exponent']:.3f} "
          f"(r^2 = {fit.r_squared:.3f})")

records, _ = E.rate_study_nonparametric("bi_isotonic", sides=[32, 64, 128],
                                        trials=5, master_seed=513)
means = E.mean_mse_by(records)
print(f"bi-isotonic (fixed square variation): mean MSE by n: "
      f"{ {n: round(m, 4) for n, m in means.items()} }")
ns = sorted(means)
print(f"  MSE(N=32) / MSE(N=128) = {means[ns[0]] / means[ns[-1]]:.2f} (decreasing in n)")
