"""Two-qubit mixed-state entanglement and conditional q-entropies."""
