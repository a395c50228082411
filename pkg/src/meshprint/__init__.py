"""Heightfield meshing, STL I/O, slicing and G-code toolpaths for desktop 3D printing."""
