from setuptools import setup, find_packages

setup(
    name="edge_fabric_simulator",
    version="0.1.0",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    install_requires=[
        "python-dotenv==1.0.0",
        "pandas==2.2.1",
        "numpy==1.26.4",
        "networkx==3.2.1",
    ],
    entry_points={
        "console_scripts": [
            "edge-fabric=edge_fabric.cli.main:main",
        ],
    },
)
