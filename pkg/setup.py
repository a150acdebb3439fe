from setuptools import find_packages, setup


def readme():
    with open('README.md') as f:
        return f.read()


# read version file
exec(open('firstnature/version.py').read())

setup(name='firstnature',
      version=__version__,  # type: ignore # noqa F821
      description='Market access, event studies and matching for the economic effects of a changing waterway',
      long_description=readme(),
      long_description_content_type='text/markdown',
      license='Apache 2.0',
      packages=find_packages(),
      include_package_data=True,
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.20.0, <2.0.0',
          'pandas>=1.5.0, <3.0.0',  # lineterminator in to_csv
          'scikit-learn>=0.24.0, <2.0.0',
          'attrs>=19.2.0',
          'scipy>=1.6.0, <2.0.0',  # sparse csgraph dijkstra
          'matplotlib>=3.0.0, <4.0.0',
          'shapely>=2.0.0, <3.0.0',  # vectorized predicates and STRtree
          'dill>=0.3.0, <0.4.0',
          'tqdm>=4.28.1, <5.0.0'
      ],
      entry_points={'console_scripts': ['firstnature=firstnature.cli.main:main']},
      test_suite='tests',
      zip_safe=False)
