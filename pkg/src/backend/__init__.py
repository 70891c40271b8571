"""C99 code generation."""
