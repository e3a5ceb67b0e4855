from setuptools import find_packages, setup

setup(
    name="gym_mobile_manipulation",
    version="0.1.0",
    description="Multi-task RL suite for dynamic trajectory tracking and grasping with a mobile manipulator",
    author="Julien Perez",
    author_email="julien.perez@epita.fr",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.10",
    install_requires=["gymnasium>=0.29,<1.0", "numpy>=1.24", "h5py>=3.8", "tqdm>=4.60"],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["mobile-manip=gym_mobile_manipulation.cli:main"]},
)
