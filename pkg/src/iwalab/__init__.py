"""Finite-level laboratory for Iwasawa modules: Lambda = Z_p[[T]] quotients,
finite abelian p-groups, group rings and pairings."""
from .errors import IwalabError, InputError
from .groups import CycloCharacter, FiniteGroup, SemidirectPresentation
from .group_algebra import GroupAlgebraElem, central_idempotents, leopoldt_reflect
from .iwasawa import LambdaElem, LambdaQuot, involution, norm_elem, omega, star
from .modules import ElemLambdaModule, Tower, growth_stats, fukuda_check, iwasawa_dual, level_quotient
from .padic import PadicInt, PadicPoly, hensel_factor
from .pairing import PairingTable, build_dual_pairing, covariance_check, is_nondegenerate
from .pgroups import FinAbPGroup, PGroupHom, snf_classify, verify_lemma_ab

__version__ = "0.1.0"
