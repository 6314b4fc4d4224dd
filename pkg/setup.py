from glob import glob

from setuptools import setup


def main():
    setup(scripts=glob("scripts/*.py"))


if __name__ == "__main__":
    main()
