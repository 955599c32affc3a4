#pragma once

namespace sandwich {

/// Caps the worker threads used for λ-grid evaluation and simulation
/// replicates. Zero or negative restores the runtime default.
void set_num_threads(int n);

/// Current cap (1 when built without OpenMP).
int num_threads();

} // namespace sandwich
