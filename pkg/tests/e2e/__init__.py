"""
End-to-End Tests

Acceptance checks for the complete workflows: entropy sandwiches, gaps,
sweeps, certificates, approximation quality and the tail bounds.
Several of them are marked slow.
"""
