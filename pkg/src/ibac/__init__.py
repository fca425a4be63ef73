"""Integer-based access control: labels as integers, dominance as arithmetic."""

from ibac.codecs import Token, decode, encode, format_token, parse_token
from ibac.dominance import DominanceVerdict, cross_check, dominates, oracle_subset
from ibac.errors import IbacError
from ibac.schema import LabelSet, PolicySchema, expand_subject, load_policy, object_label

__version__ = "0.1.0"

__all__ = [
    "DominanceVerdict", "IbacError", "LabelSet", "PolicySchema", "Token",
    "cross_check", "decode", "dominates", "encode", "expand_subject", "format_token",
    "load_policy", "object_label", "oracle_subset", "parse_token",
]
