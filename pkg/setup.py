from setuptools import find_packages, setup

setup(
    name="gcmdp",
    version="0.1.0",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.7",
    ],
    entry_points={
        "console_scripts": [
            "gcmdp=gcmdp.cli.main:main",
        ],
    },
    author="Author",
    author_email="author@example.com",
    description="Value iteration and convergence diagnostics for total-cost MDPs",
    keywords="python,mdp,markov-decision-process,value-iteration,dynamic-programming",
    url="https://github.com/username/gcmdp",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
)
