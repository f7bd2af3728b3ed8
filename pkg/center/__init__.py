"""
Center-direction machinery: small divisors, the reducibility frame and the center solve.
"""
from center.cohomology import CohomologyReport, analytic_norm, cohomology_bound, cohomology_modes, cohomology_solve
from center.diophantine import DiophantineReport, diophantine_estimate
from center.frame import CenterFrame, TwistReport, build_center_frame, isotropy_defect, twist_report
from center.solve import CenterSolution, solve_center
from center.symplectic import center_symplectic_drift, cross_block_orthogonality

__all__ = [
    "CohomologyReport", "analytic_norm", "cohomology_bound", "cohomology_modes", "cohomology_solve",
    "DiophantineReport", "diophantine_estimate",
    "CenterFrame", "TwistReport", "build_center_frame", "isotropy_defect", "twist_report",
    "CenterSolution", "solve_center",
    "center_symplectic_drift", "cross_block_orthogonality",
]
