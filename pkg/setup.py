import os

from setuptools import setup, find_packages

with open(os.path.join(os.path.abspath(os.path.dirname(__file__)), 'README.md'), encoding='utf-8') as fh:
    long_description = '\n' + fh.read()

setup(
    name='py-gl-preservers',
    version='1.0.0',
    license='Apache-2.0',
    author='SecorD',
    description='Exact classification of the linear maps on matrix spaces that preserve invertibility',
    long_description_content_type='text/markdown',
    long_description=long_description,
    packages=find_packages(exclude=['examples', 'examples.*']),
    install_requires=[
        'pretty-utils @ git+https://github.com/SecorD0/pretty-utils@main', 'python-dotenv==0.21.1', 'sympy>=1.12',
        'tqdm>=4.66'
    ],
    extras_require={
        'test': ['pytest>=7.4', 'hypothesis>=6.90']
    },
    entry_points={
        'console_scripts': ['py-gl-preservers=py_gl_preservers.cli:main']
    },
    keywords=[
        'linear preserver', 'general linear group', 'invertible matrices', 'division algebra', 'finite field',
        'exact arithmetic', 'py-gl-preservers', 'gl-preservers'
    ],
    classifiers=[
        'Programming Language :: Python :: 3.8'
    ]
)
