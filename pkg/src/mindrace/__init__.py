"""Closed-loop motor-imagery BCI toolkit.

Pipeline: FASTER artifact rejection -> FFT band features -> voting SVM ->
toggle-switch controller -> UDP race simulator, plus the offline evaluation
harness.
"""

__version__ = "0.1.0"
