"""Generalized expansiveness on countable compact spaces.

Exact scalars and ordinals (``exactnum``), symbolic spaces and truncations
(``spacemodel``), the Denjoy circle example (``denjoy``), winding towers
(``winding``) and the analyses run on them (``analysis``).
"""

__version__ = "0.1.0"
