//! Candidate screening (filled in after the solver).
