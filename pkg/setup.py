from setuptools import Extension, setup

# The coincidence-counting kernel is optional: if Cython (or a C compiler)
# is unavailable the package falls back to the numpy implementation.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("superbunch._corr_cy", ["src/superbunch/_corr_cy.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
