"""Exact Frölicher spectral sequences and modified Laplacians of finite double complexes."""

from .bicomplex import Bicomplex, BicomplexError, StructurePresentation, conjugate, expand, validate
from .dsl import ParseError, parse, parse_file, roundtrip
from .hodge import build_hodge, green, ker_lapt_dims, psd_certificate, three_space_decomposition
from .models import catalog, get_family, iwasawa, nakamura_family, torus_family
from .scalars import ParamExpr, Scalar, eval_param
from .spectral import einf_and_degeneration, next_page, oracle_page_dims, page1, table_order, total_cohomology

__version__ = "0.1.0"
