//! Placeholder module; implementation follows.
