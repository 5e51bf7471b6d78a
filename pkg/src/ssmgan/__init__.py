"""Streaming StyleMelGAN-style speech decoder for 1.6 kb/s coded packets."""
