from setuptools import setup

setup(name='ltrexplain',
      version='0.1.0',
      description='Evaluate local explanations of learning-to-rank tree models against tree-derived ground truth.',
      include_package_data=True,
      license='MIT',
      packages=['ltrexplain'],
      zip_safe=False,
      install_requires=['numpy', 'pandas', 'pytz', 'requests', 'scipy'],
      extras_require={'test': ['pytest']},
      entry_points={'console_scripts': ['ltrexplain = ltrexplain.cli:main']})
