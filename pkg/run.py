"""
DMFC-GPM Toolkit Entry Point
Run with: python run.py <command> [options]
"""
from app import create_app

app = create_app()

if __name__ == '__main__':
    app(prog_name='dmfc')
