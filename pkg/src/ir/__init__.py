"""RustIR: the control-flow-graph intermediate representation."""
