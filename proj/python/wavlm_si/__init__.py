"""Compression, analysis and int8 inference for speech-interruption models."""

try:
    from . import _wavlm_si as _ext
except ImportError:
    import _wavlm_si as _ext

globals().update({k: v for k, v in vars(_ext).items() if not k.startswith("__")})
WsiError = _ext.WsiError
