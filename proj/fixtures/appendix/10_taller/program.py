def search():
    messages = ''
    yao_height, msg = find_entity_or_value(entity_aliases = ['Yao Ming'], relation_aliases = ['height'])
    messages += msg
    saber_height, msg = find_entity_or_value(entity_aliases = ['Saber'], relation_aliases = ['height'])
    messages += msg
    if yao_height[0] > saber_height[0]:
        messages += 'Yao Ming is taller than Saber.'
    elif yao_height[0] < saber_height[0]:
        messages += 'Saber is taller than Yao Ming'
    else:
        messages += 'Yao Ming and Saber are of the same height.'
    return messages
