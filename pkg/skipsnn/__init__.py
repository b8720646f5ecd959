# SkipSNN: spiking networks with a learned input gate
__version__ = "0.1.0"
