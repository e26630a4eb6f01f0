"""
Synthetic Lollipop Data Package
"""
from app.ml.synthetic.lollipop import (
    generate_joint,
    held_out_specs,
    lollipop_mesh,
    training_specs,
    reference_spec,
)
from app.ml.synthetic.rendering import (
    drr_project,
    render_instance,
    render_volume,
    sample_joint_intensities,
    sample_volume,
    tet_intensity_correspondence,
)

__all__ = [
    'generate_joint',
    'held_out_specs',
    'lollipop_mesh',
    'training_specs',
    'reference_spec',
    'drr_project',
    'render_instance',
    'render_volume',
    'sample_joint_intensities',
    'sample_volume',
    'tet_intensity_correspondence',
]
