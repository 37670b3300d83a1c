//! Nonlinear coupling layer: growth kinematics, reaction ODEs, stress
//! assembly in the reference configuration, right-hand-side perturbation
//! terms, and the Picard fixed-point driver (implementation forthcoming in
//! this module's submodules).
