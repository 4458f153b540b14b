"""
Time-stepped network model: kinematics, radio, traffic and the tick loop.
"""
