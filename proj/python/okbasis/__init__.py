"""Tabular successor features, GPI and option-keyboard basis construction."""

from okbasis._core import *  # noqa: F401,F403
