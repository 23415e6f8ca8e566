"""nhqfi: biorthogonal quantum Fisher information for non-Hermitian BdG chains."""

from .model import BandedOperator, BdgBlock, ChainSpec, build_chain, bdg_block, \
    pt_residual, transfer_matrix, unit_cell_transfer
from .spectral import BiorthogonalEigensystem, SkinModePair, eig_biorthogonal, \
    skin_modes, localization_exponents, participation_ratio, level_spacings, \
    ep_proximity
from .qfi import QfiEstimate, qfi_finite_diff, qfi_pert_sum, qfi_hermitian_standard, \
    qfi_nhse_analytic, qfi_ep_analytic, qfi_ep_dicke_sum, qfi_braid_analytic
from .multiparam import QfiMatrixResult, angle_derivs, qfi_matrix_mode_sum, \
    qfi_matrix_closed_form, qfi_matrix_inverse, sensitivities, enhancement_factors
from .ptphase import PhasePoint, gc_exact, gc_expansion, gc_first_breaking, \
    gc_numeric, splitting_coefficient, splitting_fit, classify_regime, phase_diagram
from .protocols import BraidResult, ResourceParams, quench_survival, \
    adiabatic_gap_scan, braid, resource_time, resource_energy
from .noise import NoiseParams, NoisyQfi, gamma_eff, qfi_decay, \
    gamma_eff_nonmarkov, stability_detuning, eta_cap

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
