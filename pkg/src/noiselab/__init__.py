"""Desk-scale verification lab for noise stability and influence inequalities.

Subpackages by concern:

* ``core``    -- finite measured state spaces, tables, norms, entropy
* ``markov``  -- reversible generators, semigroups, functional constants
* ``boolean`` -- the discrete cube, Walsh analysis, influences, noise operator
* ``gauss``   -- Gaussian space via Hermite expansions, half-space boxes
* ``groups``  -- Cayley-graph walks: symmetric group and discrete tori
* ``bounds``  -- evaluators for the catalog of variance-decay bounds + sweeps
* ``junta``   -- junta extraction and low-influence approximation checks
* ``cli``     -- command-line front end
"""

__version__ = "0.1.0"
