from .bessel import (BesselSolution, bessel_cone_check, bessel_I,
                     bessel_I_derivative, bessel_K, bessel_K_derivative,
                     bessel_K_recurrence, bessel_riccati_KL,
                     bessel_riccati_L0, cone_arcs, cone_margins,
                     l0_combo_constant, log_branch_alpha_beta, log_branch_y)
