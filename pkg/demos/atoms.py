"""Needlet localization: one father atom per cutoff, printed as far-field decay.

Writes ``atom_<cutoff>.pgm`` images of a level-5 atom centred near r = 0.5.
"""

from radneedlet.bench import render, write_pgm
from radneedlet.needlet import CUTOFF_KINDS, far_field_ratio, nearest_ring_atom

J = 5

for cutoff in CUTOFF_KINDS:
    atom = nearest_ring_atom(J, 0.5, "father", cutoff)
    decay = ", ".join(f"{far_field_ratio(atom, m * 2.0**-J):.3f}" for m in (2, 5, 10))
    write_pgm(render(atom.coefficients(), 128), f"atom_{cutoff}.pgm")
    print(f"{cutoff:13s} far-field/peak at 2, 5, 10 x 2^-j: {decay}")
