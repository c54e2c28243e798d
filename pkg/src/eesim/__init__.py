"""Quantized digital and hybrid mmWave MIMO precoding: rates, power and energy efficiency."""
__version__ = "0.1.0"
