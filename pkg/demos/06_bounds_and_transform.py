"""Universal decay bound and the exponent-transfer subsolution.

C_hat = max_t sup u / (1 + t^{-1/(q-1)}) should be finite and stable under
refinement.  For q >= 2 the shifted, scaled w = eta^{1/(k-1)} (u - eta t)^+
should be a discrete subsolution of the exponent-k scheme.

    python3 demos/06_bounds_and_transform.py
"""
from vhj.experiments import exp_subsolution_transform, exp_universal_bounds

bounds = exp_universal_bounds(workers=4)
print("\n".join(bounds.summary))

sub = exp_subsolution_transform(q=2.0, k_exp=1.3, eta=0.5)
print("\n".join(sub.summary))
