"""THz FMCW scan simulation, wavelet enhancement and defect quantification."""
