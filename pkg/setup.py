from setuptools import setup, find_packages

setup(
    name='metro',
    version='0.1.0',
    packages=find_packages(exclude=['examples', 'examples.*']),
    install_requires=[
        'click',
        'python-dotenv',
        'numpy',
        'scipy',
    ],
    description="Fisher information, quantum Cramér–Rao bounds and estimation experiments for quantum models.",
    entry_points={
        'console_scripts': [
            'metro=metro.cli:cli'
        ],
    },
)
