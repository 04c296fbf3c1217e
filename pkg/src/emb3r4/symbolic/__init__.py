"""Symbolic-method engine and the exact identity suite."""
from .symexpr import (FAMILIES, SymbolFamily, SymExpr, bianchi_rewrite, formal_vec, restore, s_bianchi,
                      sym, vec, wedge)
from .identities import (IDENTITIES, assert_equal, build_RS, run_identities, schwartz_zippel_check,
                         verify_beta_formula, verify_codazzi_control, verify_h0_correspondence,
                         verify_restoration_rules, verify_rivertz_vanishing, verify_rs_coefficients,
                         verify_wedge_determinant)
from .classical import cubic_discriminant, quartic_catalecticant, verify_classical_invariants

__all__ = [
    "FAMILIES", "SymbolFamily", "SymExpr", "bianchi_rewrite", "formal_vec", "restore", "s_bianchi",
    "sym", "vec", "wedge", "IDENTITIES", "assert_equal", "build_RS", "run_identities",
    "schwartz_zippel_check", "verify_beta_formula", "verify_codazzi_control", "verify_h0_correspondence",
    "verify_restoration_rules", "verify_rivertz_vanishing", "verify_rs_coefficients",
    "verify_wedge_determinant", "cubic_discriminant", "quartic_catalecticant",
    "verify_classical_invariants",
]
