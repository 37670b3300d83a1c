//! Half-space and bent-half-space model problems: reflection/extension
//! operators, graph-coordinate pullbacks, perturbation operators, and the
//! Neumann-series contraction harness (implementation forthcoming in this
//! module's submodules).
