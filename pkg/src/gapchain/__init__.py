"""Spectral gaps of frustration-free spin chains with matrix-product ground states."""
