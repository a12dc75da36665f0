"""hypersafe: verification of forall-exists temporal safety hyperproperties.

Layers: ``lts`` (transition systems and lassos), ``relspec`` (trace
relations and derivatives), ``solver`` (automatic game solving and
witness extraction), ``imp`` (bounded imperative frontend), ``kernel``
(incremental proof rules and scripts), ``cli`` (command-line driver).
"""

__version__ = "0.1.0"
