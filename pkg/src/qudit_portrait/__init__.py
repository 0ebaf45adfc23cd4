"""Entropic inequalities for single qudits through index placements and portrait maps."""
